use super::weights::ClientUpdate;
use crate::data::{batches, Dataset};
use crate::error::{Error, Result};
use crate::nn::{loss_and_gradient, sgd_step_in_place, Model, ModelSpec, ParamVector, SgdConfig};
use crate::rng::{derive_seed, Stream};

/// A client's private data: indices into a shared training set.
#[derive(Debug, Clone, Copy)]
pub struct ClientData<'a> {
    pub client_id: usize,
    pub dataset: &'a Dataset,
    pub indices: &'a [usize],
}

/// Runs `cfg.epochs` epochs of mini-batch SGD starting from `global`.
///
/// Each epoch reshuffles with a seed derived from `(seed, epoch)`. The
/// reported loss is the per-sample mean over the final epoch.
pub fn local_train(
    global: &ParamVector,
    spec: &ModelSpec,
    data: ClientData<'_>,
    cfg: &SgdConfig,
    seed: u64,
) -> Result<ClientUpdate> {
    let id = data.client_id;
    let tag = |e: Error| e.for_client(id);
    cfg.validate().map_err(tag)?;
    if data.indices.is_empty() {
        return Err(tag(Error::validation("client holds no samples")));
    }
    let mut model = Model::new(spec.clone(), global.clone()).map_err(tag)?;
    let mut params = global.clone();
    let mut last_epoch_loss = 0.0;

    for epoch in 0..cfg.epochs {
        let epoch_seed = derive_seed(seed, Stream::Epoch, &[epoch as u64]);
        let mut loss_sum = 0.0;
        for (x, y) in batches(data.dataset, data.indices, cfg.batch_size, epoch_seed).map_err(tag)? {
            let (loss, grads) = loss_and_gradient(&model, &x, &y).map_err(tag)?;
            loss_sum += loss * y.len() as f64;
            params = model.into_params();
            sgd_step_in_place(&mut params, &grads, cfg.learning_rate);
            model = Model::new(spec.clone(), params.clone()).map_err(tag)?;
        }
        last_epoch_loss = loss_sum / data.indices.len() as f64;
    }

    if !params.is_finite() {
        return Err(Error::NonFinite { client_id: id });
    }
    Ok(ClientUpdate {
        client_id: id,
        params,
        num_samples: data.indices.len(),
        mean_train_loss: last_epoch_loss,
    })
}
