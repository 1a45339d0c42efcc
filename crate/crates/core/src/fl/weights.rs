use super::distance::{distance_transform, model_sq_distance};
use crate::error::{Error, Result};
use crate::nn::ParamVector;

/// What a client sends back after local training.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientUpdate {
    pub client_id: usize,
    pub params: ParamVector,
    pub num_samples: usize,
    pub mean_train_loss: f64,
}

/// Guard constants for the FedBA weights.
///
/// `g_floor` bounds `g(d)` away from zero before the log; `epsilon` is added
/// after shifting the scores so the smallest one is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FedBaGuard {
    pub epsilon: f64,
    pub g_floor: f64,
}

impl Default for FedBaGuard {
    fn default() -> Self {
        FedBaGuard {
            epsilon: 1e-8,
            g_floor: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregationRule {
    FedAvg,
    FedBa(FedBaGuard),
}

impl AggregationRule {
    pub fn fedba() -> Self {
        AggregationRule::FedBa(FedBaGuard::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            AggregationRule::FedAvg => "fedavg",
            AggregationRule::FedBa(_) => "fedba",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClientWeight {
    pub client_id: usize,
    /// `‖δᵏ − δ_t‖²`, when known.
    pub sq_distance: Option<f64>,
    /// FedBA: the transformed distance. FedAvg: the sample count.
    pub raw_score: f64,
    pub weight: f64,
}

/// Aggregation weights of one round, one entry per participating client.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightReport {
    pub entries: Vec<ClientWeight>,
}

impl WeightReport {
    pub fn weights(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.weight).collect()
    }

    pub fn client_ids(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.client_id).collect()
    }

    pub fn min_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).fold(f64::INFINITY, f64::min)
    }

    pub fn max_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `-Σ p ln p` in nats.
    pub fn entropy(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.weight > 0.0)
            .map(|e| -e.weight * e.weight.ln())
            .sum()
    }

    /// Checks the simplex invariant: each weight in `[0, 1]`, sum within `tol` of 1.
    pub fn check_simplex(&self, tol: f64) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::validation("weight report is empty"));
        }
        if let Some(e) = self
            .entries
            .iter()
            .find(|e| !(e.weight.is_finite() && (0.0..=1.0).contains(&e.weight)))
        {
            return Err(Error::validation(format!(
                "weight {} of client {} is outside [0, 1]",
                e.weight, e.client_id
            )));
        }
        let sum: f64 = self.entries.iter().map(|e| e.weight).sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::validation(format!("weights sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// Fills in squared distances (aligned with `entries`).
    pub fn with_distances(mut self, distances: &[f64]) -> Self {
        for (e, d) in self.entries.iter_mut().zip(distances) {
            e.sq_distance = Some(*d);
        }
        self
    }

    pub fn mean_sq_distance(&self) -> Option<f64> {
        let ds: Option<Vec<f64>> = self.entries.iter().map(|e| e.sq_distance).collect();
        ds.filter(|d| !d.is_empty())
            .map(|d| d.iter().sum::<f64>() / d.len() as f64)
    }
}

/// FedBA weights from precomputed squared distances.
///
/// Scores `a_k = ln max(g(d_k), g_floor)` are shifted to
/// `a_k - min_j a_j + epsilon` and normalised. When every score is equal
/// the result is exactly uniform.
pub fn fedba_weights_from_distances(
    client_ids: &[usize],
    sq_distances: &[f64],
    guard: FedBaGuard,
) -> Result<WeightReport> {
    if client_ids.is_empty() {
        return Err(Error::validation("no client updates to weight"));
    }
    if client_ids.len() != sq_distances.len() {
        return Err(Error::validation(format!(
            "{} client ids but {} distances",
            client_ids.len(),
            sq_distances.len()
        )));
    }
    if !(guard.epsilon > 0.0 && guard.epsilon.is_finite()) {
        return Err(Error::validation(format!(
            "guard epsilon must be positive, got {}",
            guard.epsilon
        )));
    }
    let mut scores = Vec::with_capacity(sq_distances.len());
    for (&id, &d) in client_ids.iter().zip(sq_distances) {
        if !d.is_finite() {
            return Err(Error::NonFinite { client_id: id });
        }
        scores.push(distance_transform(d, guard.g_floor)?);
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let weights: Vec<f64> = if min == max {
        vec![1.0 / scores.len() as f64; scores.len()]
    } else {
        let shifted: Vec<f64> = scores.iter().map(|a| a - min + guard.epsilon).collect();
        let total: f64 = shifted.iter().sum();
        shifted.iter().map(|s| s / total).collect()
    };

    Ok(WeightReport {
        entries: client_ids
            .iter()
            .zip(sq_distances)
            .zip(scores.iter().zip(weights))
            .map(|((&client_id, &d), (&raw_score, weight))| ClientWeight {
                client_id,
                sq_distance: Some(d),
                raw_score,
                weight,
            })
            .collect(),
    })
}

/// FedBA weights measured against the previous global model.
pub fn fedba_weights(updates: &[ClientUpdate], global: &ParamVector, guard: FedBaGuard) -> Result<WeightReport> {
    if updates.is_empty() {
        return Err(Error::validation("no client updates to weight"));
    }
    let mut distances = Vec::with_capacity(updates.len());
    for u in updates {
        if !u.params.is_finite() {
            return Err(Error::NonFinite {
                client_id: u.client_id,
            });
        }
        distances.push(model_sq_distance(&u.params, global).map_err(|e| e.for_client(u.client_id))?);
    }
    let ids: Vec<usize> = updates.iter().map(|u| u.client_id).collect();
    fedba_weights_from_distances(&ids, &distances, guard)
}

/// FedAvg weights `n_k / Σ n_j`.
pub fn fedavg_weights(updates: &[ClientUpdate]) -> Result<WeightReport> {
    if updates.is_empty() {
        return Err(Error::validation("no client updates to weight"));
    }
    let total: u64 = updates.iter().map(|u| u.num_samples as u64).sum();
    if total == 0 {
        return Err(Error::validation("clients hold zero samples in total"));
    }
    Ok(WeightReport {
        entries: updates
            .iter()
            .map(|u| ClientWeight {
                client_id: u.client_id,
                sq_distance: None,
                raw_score: u.num_samples as f64,
                weight: u.num_samples as f64 / total as f64,
            })
            .collect(),
    })
}

/// Weights for `updates` under `rule`.
pub fn compute_weights(rule: &AggregationRule, updates: &[ClientUpdate], global: &ParamVector) -> Result<WeightReport> {
    match rule {
        AggregationRule::FedAvg => fedavg_weights(updates),
        AggregationRule::FedBa(guard) => fedba_weights(updates, global, *guard),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn update(id: usize, params: Vec<f64>, n: usize) -> ClientUpdate {
        ClientUpdate {
            client_id: id,
            params: ParamVector::new(params),
            num_samples: n,
            mean_train_loss: 0.0,
        }
    }

    #[test]
    fn equal_distances_give_uniform_weights() {
        let r = fedba_weights_from_distances(&[0, 1, 2], &[0.3, 0.3, 0.3], FedBaGuard::default()).unwrap();
        assert_eq!(r.weights(), vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn two_clients_worked_example() {
        let guard = FedBaGuard::default();
        let r = fedba_weights_from_distances(&[0, 1], &[1.0, 2.0], guard).unwrap();
        let a1 = 2f64.atan().ln();
        assert_eq!(r.entries[0].raw_score, 0.0);
        assert!((r.entries[1].raw_score - a1).abs() < 1e-15);
        assert!((a1 - 0.101_787_988).abs() < 1e-9);
        let (s0, s1) = (1e-8, a1 + 1e-8);
        assert!((r.entries[0].weight - s0 / (s0 + s1)).abs() < 1e-18);
        assert!((r.entries[0].weight - 9.82e-8).abs() < 1e-10);
        assert!((r.entries[1].weight - 0.999_999_9).abs() < 1e-7);
    }

    #[test]
    fn single_client_gets_everything() {
        let r = fedba_weights_from_distances(&[4], &[12.0], FedBaGuard::default()).unwrap();
        assert_eq!(r.weights(), vec![1.0]);
        let r = fedavg_weights(&[update(4, vec![0.0], 10)]).unwrap();
        assert_eq!(r.weights(), vec![1.0]);
    }

    #[test]
    fn farther_clients_weigh_more_within_a_branch() {
        let r = fedba_weights_from_distances(&[0, 1, 2], &[0.1, 0.2, 0.4], FedBaGuard::default()).unwrap();
        let w = r.weights();
        assert!(w[0] < w[1] && w[1] < w[2]);
        r.check_simplex(1e-9).unwrap();
    }

    #[test]
    fn zero_distance_uses_floor() {
        let r = fedba_weights_from_distances(&[0, 1], &[0.0, 0.5], FedBaGuard::default()).unwrap();
        assert_eq!(r.entries[0].raw_score, 1e-12f64.ln());
        r.check_simplex(1e-9).unwrap();
    }

    #[test]
    fn non_finite_update_names_client() {
        let global = ParamVector::new(vec![0.0, 0.0]);
        let ups = [update(3, vec![0.0, 1.0], 1), update(8, vec![f64::NAN, 1.0], 1)];
        assert!(matches!(
            fedba_weights(&ups, &global, FedBaGuard::default()),
            Err(Error::NonFinite { client_id: 8 })
        ));
    }

    #[test]
    fn fedavg_proportional_to_counts() {
        let r = fedavg_weights(&[update(0, vec![0.0], 3000), update(1, vec![0.0], 3000)]).unwrap();
        assert_eq!(r.weights(), vec![0.5, 0.5]);
        let r = fedavg_weights(&[update(0, vec![0.0], 1000), update(1, vec![0.0], 3000)]).unwrap();
        assert_eq!(r.weights(), vec![0.25, 0.75]);
        assert!(fedavg_weights(&[update(0, vec![0.0], 0)]).is_err());
        assert!(fedavg_weights(&[]).is_err());
    }

    #[test]
    fn entropy_and_extremes() {
        let r = fedavg_weights(&[update(0, vec![0.0], 1), update(1, vec![0.0], 1)]).unwrap();
        assert!((r.entropy() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(r.min_weight(), 0.5);
        assert_eq!(r.max_weight(), 0.5);
        assert_eq!(r.mean_sq_distance(), None);
        assert_eq!(r.with_distances(&[1.0, 3.0]).mean_sq_distance(), Some(2.0));
    }
}
