use super::tensor::Tensor;
use crate::error::{Error, Result};

pub(crate) fn check_labels(labels: &[usize], classes: usize) -> Result<()> {
    if let Some((i, l)) = labels.iter().enumerate().find(|(_, l)| **l >= classes) {
        return Err(Error::validation(format!(
            "label {l} at position {i} is outside [0, {classes})"
        )));
    }
    Ok(())
}

/// Numerically stable softmax of `logits` written into `out`.
pub(crate) fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, z) in out.iter_mut().zip(logits) {
        *o = (z - max).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
}

/// `-log softmax(logits)[label]`, computed as `(max - z_label) + ln Σ exp(z - max)`
/// so that both terms are non-negative.
pub(crate) fn sample_loss(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|z| (z - max).exp()).sum();
    (max - logits[label]) + sum.ln()
}

/// Mean cross-entropy over the batch for `[batch, classes]` logits.
pub fn cross_entropy_loss(logits: &Tensor, labels: &[usize]) -> Result<f64> {
    let shape = logits.shape();
    if shape.len() != 2 {
        return Err(Error::shape(format!(
            "logits must be [batch, classes], got {shape:?}"
        )));
    }
    let (b, classes) = (shape[0], shape[1]);
    if labels.len() != b {
        return Err(Error::validation(format!(
            "{} labels for a batch of {b}",
            labels.len()
        )));
    }
    if b == 0 {
        return Err(Error::validation("empty batch"));
    }
    check_labels(labels, classes)?;
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(s, &l)| sample_loss(logits.row(s), l))
        .sum();
    Ok(total / b as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_ten_classes_is_ln_ten() {
        let logits = Tensor::new(vec![1, 10], vec![0.37; 10]).unwrap();
        for label in [0, 4, 9] {
            let l = cross_entropy_loss(&logits, &[label]).unwrap();
            assert!((l - 10f64.ln()).abs() < 1e-12);
            assert!((l - std::f64::consts::LN_10).abs() < 1e-12);
        }
    }

    #[test]
    fn saturated_correct_class_is_zero() {
        let logits = Tensor::new(vec![1, 2], vec![1000.0, 0.0]).unwrap();
        assert_eq!(cross_entropy_loss(&logits, &[0]).unwrap(), 0.0);
    }

    #[test]
    fn batch_mean_of_uniform_pair() {
        let logits = Tensor::new(vec![2, 2], vec![0.0; 4]).unwrap();
        let l = cross_entropy_loss(&logits, &[0, 1]).unwrap();
        assert!((l - 2f64.ln()).abs() < 1e-15);
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_label() {
        let logits = Tensor::new(vec![1, 3], vec![0.0; 3]).unwrap();
        assert!(matches!(
            cross_entropy_loss(&logits, &[3]),
            Err(Error::Validation(_))
        ));
    }

    proptest! {
        #[test]
        fn loss_is_non_negative(
            z in proptest::collection::vec(-500.0f64..500.0, 5),
            label in 0usize..5,
        ) {
            let logits = Tensor::new(vec![1, 5], z).unwrap();
            prop_assert!(cross_entropy_loss(&logits, &[label]).unwrap() >= 0.0);
        }
    }
}
