//! Central-difference gradient estimate, used as the oracle for [`backward`].
//!
//! [`backward`]: super::backward

use super::loss::cross_entropy_loss;
use super::model::{predict, Model};
use super::params::GradientSet;
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// `(loss(θ + h·e_i) - loss(θ - h·e_i)) / 2h` for every parameter `i`.
pub fn finite_diff_gradient(model: &Model, batch: &Tensor, labels: &[usize], h: f64) -> Result<GradientSet> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::validation(format!("step h must be positive, got {h}")));
    }
    let mut probe = model.clone();
    let base = model.params().clone();
    let mut grads = Vec::with_capacity(base.len());
    let mut shifted = base.clone();
    for i in 0..base.len() {
        let orig = base.as_slice()[i];
        shifted.as_mut_slice()[i] = orig + h;
        probe.set_params(shifted.clone())?;
        let plus = cross_entropy_loss(&predict(&probe, batch)?, labels)?;
        shifted.as_mut_slice()[i] = orig - h;
        probe.set_params(shifted.clone())?;
        let minus = cross_entropy_loss(&predict(&probe, batch)?, labels)?;
        shifted.as_mut_slice()[i] = orig;
        grads.push((plus - minus) / (2.0 * h));
    }
    Ok(GradientSet::new(grads))
}

/// Largest elementwise `|a - b| / max(|a|, |b|, floor)`.
pub fn max_relative_error(a: &GradientSet, b: &GradientSet, floor: f64) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}
