//! Distance transform behind the FedBA weights.

use crate::error::{Error, Result};
use crate::nn::ParamVector;

/// Piecewise squash: identity on `[0, 1]`, `arctan` above.
pub fn g(x: f64) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!(
            "g is defined for finite x >= 0, got {x}"
        )));
    }
    Ok(if x <= 1.0 { x } else { x.atan() })
}

/// `ln(max(g(x), g_floor))`. The floor keeps `x = 0` finite.
pub fn distance_transform(x: f64, g_floor: f64) -> Result<f64> {
    if !(g_floor > 0.0 && g_floor.is_finite()) {
        return Err(Error::Domain(format!(
            "g floor must be positive, got {g_floor}"
        )));
    }
    Ok(g(x)?.max(g_floor).ln())
}

/// Squared Euclidean distance between two parameter vectors.
pub fn model_sq_distance(a: &ParamVector, b: &ParamVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape(format!(
            "parameter vectors of length {} and {} cannot be compared",
            a.len(),
            b.len()
        )));
    }
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum())
}
