use super::params::{check_same_len, GradientSet, ParamVector};
use crate::error::{Error, Result};

/// Local training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl SgdConfig {
    pub fn new(learning_rate: f64, epochs: usize, batch_size: usize) -> Result<Self> {
        let cfg = SgdConfig {
            learning_rate,
            epochs,
            batch_size,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::validation(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::validation("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch size must be at least 1"));
        }
        Ok(())
    }
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            learning_rate: 1e-3,
            epochs: 5,
            batch_size: 64,
        }
    }
}

/// One plain SGD step: `params - learning_rate * grads`.
pub fn sgd_step(params: &ParamVector, grads: &GradientSet, learning_rate: f64) -> Result<ParamVector> {
    check_same_len(params.len(), grads.len(), "sgd step")?;
    Ok(ParamVector::new(
        params
            .as_slice()
            .iter()
            .zip(grads.as_slice())
            .map(|(p, g)| p - learning_rate * g)
            .collect(),
    ))
}

pub(crate) fn sgd_step_in_place(params: &mut ParamVector, grads: &GradientSet, learning_rate: f64) {
    params
        .as_mut_slice()
        .iter_mut()
        .zip(grads.as_slice())
        .for_each(|(p, g)| *p -= learning_rate * g);
}
