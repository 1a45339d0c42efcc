use super::weights::{ClientUpdate, WeightReport};
use crate::error::{Error, Result};
use crate::nn::ParamVector;

/// Tolerance on `Σ p_k = 1`.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Convex combination `Σ p_k δᵏ`, summed in ascending client-id order.
pub fn aggregate(updates: &[ClientUpdate], weights: &WeightReport) -> Result<ParamVector> {
    if updates.is_empty() {
        return Err(Error::validation("no client updates to aggregate"));
    }
    if updates.len() != weights.entries.len() {
        return Err(Error::validation(format!(
            "{} updates but {} weights",
            updates.len(),
            weights.entries.len()
        )));
    }
    weights.check_simplex(SIMPLEX_TOL)?;

    let mut pairs: Vec<(&ClientUpdate, f64)> = Vec::with_capacity(updates.len());
    for u in updates {
        let mut matching = weights.entries.iter().filter(|e| e.client_id == u.client_id);
        match (matching.next(), matching.next()) {
            (Some(e), None) => pairs.push((u, e.weight)),
            _ => {
                return Err(Error::validation(format!(
                    "client {} must have exactly one weight",
                    u.client_id
                )))
            }
        }
    }
    pairs.sort_by_key(|(u, _)| u.client_id);
    if pairs.windows(2).any(|w| w[0].0.client_id == w[1].0.client_id) {
        return Err(Error::validation("duplicate client id among updates"));
    }

    let len = pairs[0].0.params.len();
    if let Some((u, _)) = pairs.iter().find(|(u, _)| u.params.len() != len) {
        return Err(Error::shape(format!(
            "client {} sent {} parameters, expected {len}",
            u.client_id,
            u.params.len()
        )));
    }

    let (first, w0) = pairs[0];
    let mut acc: Vec<f64> = first.params.as_slice().iter().map(|v| w0 * v).collect();
    for (u, w) in &pairs[1..] {
        acc.iter_mut()
            .zip(u.params.as_slice())
            .for_each(|(a, v)| *a += w * v);
    }
    Ok(ParamVector::new(acc))
}

/// `Σ p_k L_k` with losses aligned to `weights.entries`.
pub fn global_loss(client_losses: &[f64], weights: &WeightReport) -> Result<f64> {
    if client_losses.len() != weights.entries.len() {
        return Err(Error::validation(format!(
            "{} losses but {} weights",
            client_losses.len(),
            weights.entries.len()
        )));
    }
    Ok(client_losses
        .iter()
        .zip(&weights.entries)
        .map(|(l, e)| l * e.weight)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fl::weights::ClientWeight;
    use proptest::prelude::*;

    fn update(id: usize, params: Vec<f64>) -> ClientUpdate {
        ClientUpdate {
            client_id: id,
            params: ParamVector::new(params),
            num_samples: 1,
            mean_train_loss: 0.0,
        }
    }

    fn report(ids: &[usize], w: &[f64]) -> WeightReport {
        WeightReport {
            entries: ids
                .iter()
                .zip(w)
                .map(|(&client_id, &weight)| ClientWeight {
                    client_id,
                    sq_distance: None,
                    raw_score: 0.0,
                    weight,
                })
                .collect(),
        }
    }

    #[test]
    fn midpoint() {
        let ups = [update(0, vec![0.0]), update(1, vec![2.0])];
        let out = aggregate(&ups, &report(&[0, 1], &[0.5, 0.5])).unwrap();
        assert_eq!(out.as_slice(), &[1.0]);
    }

    #[test]
    fn degenerate_weight_returns_first_exactly() {
        let ups = [
            update(0, vec![0.1, -3.7, 1e-300]),
            update(1, vec![5.0, 6.0, 7.0]),
            update(2, vec![-1.0, 2.0, 9.0]),
        ];
        let out = aggregate(&ups, &report(&[0, 1, 2], &[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(out, ups[0].params);
    }

    #[test]
    fn order_of_updates_does_not_matter() {
        let a = [update(2, vec![1.0, 2.0]), update(0, vec![3.0, -1.0]), update(1, vec![0.5, 0.5])];
        let b = [a[1].clone(), a[2].clone(), a[0].clone()];
        let w = report(&[0, 1, 2], &[0.2, 0.3, 0.5]);
        assert_eq!(aggregate(&a, &w).unwrap(), aggregate(&b, &w).unwrap());
    }

    #[test]
    fn misaligned_inputs() {
        let ups = [update(0, vec![0.0]), update(1, vec![2.0])];
        assert!(aggregate(&ups, &report(&[0], &[1.0])).is_err());
        assert!(aggregate(&ups, &report(&[0, 2], &[0.5, 0.5])).is_err());
        assert!(aggregate(&ups, &report(&[0, 1], &[0.5, 0.6])).is_err());
        let dup = [update(0, vec![0.0]), update(0, vec![2.0])];
        assert!(aggregate(&dup, &report(&[0, 0], &[0.5, 0.5])).is_err());
        let ragged = [update(0, vec![0.0]), update(1, vec![2.0, 1.0])];
        assert!(aggregate(&ragged, &report(&[0, 1], &[0.5, 0.5])).is_err());
    }

    #[test]
    fn weighted_loss() {
        let w = report(&[0, 1], &[0.5, 0.5]);
        assert_eq!(global_loss(&[2.0, 4.0], &w).unwrap(), 3.0);
        assert_eq!(global_loss(&[1.7], &report(&[3], &[1.0])).unwrap(), 1.7);
        assert_eq!(global_loss(&[0.25, 9.0], &report(&[0, 1], &[1.0, 0.0])).unwrap(), 0.25);
        assert!(global_loss(&[1.0], &w).is_err());
    }

    fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.01f64..1.0, n).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn identical_params_are_a_fixed_point(
            p in proptest::collection::vec(-10.0f64..10.0, 1..20),
            w in simplex(4),
        ) {
            let ups: Vec<_> = (0..4).map(|i| update(i, p.clone())).collect();
            let out = aggregate(&ups, &report(&[0, 1, 2, 3], &w)).unwrap();
            for (o, x) in out.as_slice().iter().zip(&p) {
                prop_assert!((o - x).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }

        #[test]
        fn scale_covariance(
            params in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 6), 3),
            w in simplex(3),
            c in -100.0f64..100.0,
        ) {
            let ids = [0, 1, 2];
            let ups: Vec<_> = params.iter().enumerate().map(|(i, p)| update(i, p.clone())).collect();
            let scaled: Vec<_> = ups.iter().map(|u| update(u.client_id, u.params.scaled(c).into_inner())).collect();
            let base = aggregate(&ups, &report(&ids, &w)).unwrap();
            let out = aggregate(&scaled, &report(&ids, &w)).unwrap();
            for (o, b) in out.as_slice().iter().zip(base.as_slice()) {
                prop_assert!((o - c * b).abs() <= 1e-12 * (c.abs() * 10.0).max(1.0));
            }
        }
    }
}
