//! Minimal neural-network engine: dense, convolution, max-pool, ReLU and
//! flatten layers with analytic backpropagation of the mean cross-entropy
//! loss and plain SGD.

mod gradcheck;
mod loss;
mod model;
mod ops;
mod params;
mod sgd;
mod spec;
mod tensor;

pub use gradcheck::{finite_diff_gradient, max_relative_error};
pub use loss::cross_entropy_loss;
pub use model::{backward, forward, init_model, predict, ActivationCache, Model};
pub use params::{GradientSet, ParamVector};
pub use sgd::{sgd_step, SgdConfig};
pub(crate) use sgd::sgd_step_in_place;
pub use spec::{LayerSpec, ModelSpec, Shape};
pub use tensor::Tensor;

/// Mean loss and its gradient for one batch.
pub fn loss_and_gradient(
    model: &Model,
    batch: &Tensor,
    labels: &[usize],
) -> crate::Result<(f64, GradientSet)> {
    let (logits, cache) = forward(model, batch)?;
    let loss = cross_entropy_loss(&logits, labels)?;
    let grads = backward(model, &cache, labels)?;
    Ok((loss, grads))
}
