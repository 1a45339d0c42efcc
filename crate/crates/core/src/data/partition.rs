//! Dirichlet label-skew partitioning with a fixed sample count per client.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletConfig {
    /// Concentration `μ` of the symmetric Dirichlet over class proportions.
    pub concentration: f64,
    pub num_clients: usize,
    pub per_client_count: usize,
    pub seed: u64,
}

/// Sample indices owned by each client.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    assignments: Vec<Vec<usize>>,
}

impl PartitionPlan {
    pub fn new(assignments: Vec<Vec<usize>>) -> Self {
        PartitionPlan { assignments }
    }

    pub fn num_clients(&self) -> usize {
        self.assignments.len()
    }

    pub fn client(&self, k: usize) -> &[usize] {
        &self.assignments[k]
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }

    /// Per-client class histograms.
    pub fn label_histograms(&self, labels: &[usize], num_classes: usize) -> Vec<Vec<usize>> {
        self.assignments
            .iter()
            .map(|idx| {
                let mut h = vec![0; num_classes];
                for &i in idx {
                    h[labels[i]] += 1;
                }
                h
            })
            .collect()
    }
}

/// Shannon entropy (nats) of a histogram.
pub fn histogram_entropy(hist: &[usize]) -> f64 {
    let total: usize = hist.iter().sum();
    if total == 0 {
        return 0.0;
    }
    hist.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.ln()
        })
        .sum()
}

fn validate(cfg: &DirichletConfig, dataset_len: usize) -> Result<()> {
    if !(cfg.concentration > 0.0 && cfg.concentration.is_finite()) {
        return Err(Error::validation(format!(
            "Dirichlet concentration must be positive, got {}",
            cfg.concentration
        )));
    }
    if cfg.num_clients == 0 || cfg.per_client_count == 0 {
        return Err(Error::validation(
            "number of clients and per-client count must be positive",
        ));
    }
    let need = cfg.num_clients.checked_mul(cfg.per_client_count);
    match need {
        Some(need) if need <= dataset_len => Ok(()),
        _ => Err(Error::Capacity(format!(
            "{} clients x {} samples exceeds the {dataset_len} available",
            cfg.num_clients, cfg.per_client_count
        ))),
    }
}

/// Draws class proportions from `Dir(μ·1)` by normalising Gamma draws.
fn dirichlet_draw<R: Rng>(rng: &mut R, gamma: &Gamma<f64>, classes: usize) -> Vec<f64> {
    let mut q: Vec<f64> = (0..classes).map(|_| gamma.sample(rng)).collect();
    let sum: f64 = q.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        q.iter_mut().for_each(|v| *v /= sum);
    } else {
        // Every Gamma draw underflowed (tiny μ): all mass on one class.
        let pick = rng.random_range(0..classes);
        q.iter_mut().enumerate().for_each(|(c, v)| *v = f64::from(u8::from(c == pick)));
    }
    q
}

/// Integer counts proportional to `q` summing exactly to `total`, using
/// largest-remainder rounding (ties go to the lower class index).
pub fn largest_remainder(q: &[f64], total: usize) -> Vec<usize> {
    let scaled: Vec<f64> = q.iter().map(|p| p * total as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &c in order.iter().take(total.saturating_sub(assigned)) {
        counts[c] += 1;
    }
    counts
}

/// Splits samples across clients with Dirichlet label skew.
///
/// Each client draws class proportions from `Dir(μ·1)`, the proportions are
/// turned into exactly `per_client_count` samples, and the samples are taken
/// without replacement from per-class pools. When a class pool cannot cover
/// its target, the shortfall moves to the class with the largest remaining
/// pool (lowest index on ties).
pub fn dirichlet_partition(labels: &[usize], num_classes: usize, cfg: &DirichletConfig) -> Result<PartitionPlan> {
    validate(cfg, labels.len())?;
    if num_classes == 0 {
        return Err(Error::validation("dataset has no classes"));
    }
    let gamma = Gamma::new(cfg.concentration, 1.0)
        .map_err(|e| Error::validation(format!("Dirichlet concentration: {e}")))?;
    let mut rng = stream_rng(cfg.seed, Stream::Partition, &[]);

    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= num_classes {
            return Err(Error::validation(format!(
                "label {l} at index {i} is outside [0, {num_classes})"
            )));
        }
        pools[l].push(i);
    }
    for pool in &mut pools {
        pool.shuffle(&mut rng);
    }

    let mut assignments = Vec::with_capacity(cfg.num_clients);
    for _ in 0..cfg.num_clients {
        let q = dirichlet_draw(&mut rng, &gamma, num_classes);
        let mut take = largest_remainder(&q, cfg.per_client_count);

        let mut deficit = 0;
        for (t, pool) in take.iter_mut().zip(&pools) {
            if *t > pool.len() {
                deficit += *t - pool.len();
                *t = pool.len();
            }
        }
        while deficit > 0 {
            let (c, room) = take
                .iter()
                .zip(&pools)
                .map(|(t, pool)| pool.len() - t)
                .enumerate()
                .fold((0, 0), |best, (c, room)| if room > best.1 { (c, room) } else { best });
            // Capacity was checked up front, so some pool still has room.
            debug_assert!(room > 0);
            let add = room.min(deficit);
            take[c] += add;
            deficit -= add;
        }

        let mut mine = Vec::with_capacity(cfg.per_client_count);
        for (t, pool) in take.iter().zip(&mut pools) {
            let keep = pool.len() - t;
            mine.extend(pool.drain(keep..));
        }
        mine.sort_unstable();
        assignments.push(mine);
    }
    Ok(PartitionPlan { assignments })
}
