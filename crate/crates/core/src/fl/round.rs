use rayon::prelude::*;

use super::aggregate::{aggregate, global_loss};
use super::client::{local_train, ClientData};
use super::distance::model_sq_distance;
use super::sampling::sample_clients;
use super::weights::{compute_weights, AggregationRule, ClientUpdate, WeightReport};
use crate::data::{Dataset, PartitionPlan};
use crate::error::{Error, Result};
use crate::nn::{ModelSpec, ParamVector, SgdConfig};
use crate::rng::{derive_seed, Stream};

/// Server-side state: the number of completed rounds and the global model.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalState {
    pub round: u64,
    pub params: ParamVector,
}

impl GlobalState {
    pub fn new(params: ParamVector) -> Self {
        GlobalState { round: 0, params }
    }
}

/// The simulated population: a model architecture and each client's data.
#[derive(Debug, Clone, Copy)]
pub struct Federation<'a> {
    pub spec: &'a ModelSpec,
    pub train: &'a Dataset,
    pub plan: &'a PartitionPlan,
}

impl<'a> Federation<'a> {
    pub fn num_clients(&self) -> usize {
        self.plan.num_clients()
    }

    pub fn client(&self, k: usize) -> ClientData<'a> {
        ClientData {
            client_id: k,
            dataset: self.train,
            indices: self.plan.client(k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundConfig {
    pub sgd: SgdConfig,
    pub sample_rate: f64,
    pub seed: u64,
}

/// How the sampled clients of a round are trained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// One rayon task per client, on the current rayon pool.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    pub sampled: Vec<usize>,
    /// `Σ p_k L_k` over the sampled clients' final-epoch training losses.
    pub global_train_loss: f64,
    pub mean_sq_distance: f64,
    pub min_weight: f64,
    pub max_weight: f64,
    pub weight_entropy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub state: GlobalState,
    pub weights: WeightReport,
    pub metrics: RoundMetrics,
}

/// Seed of client `client_id`'s local training in round `round`.
pub fn client_seed(seed: u64, client_id: usize, round: u64) -> u64 {
    derive_seed(seed, Stream::Client, &[client_id as u64, round])
}

/// Trains the sampled clients from the current global model, so the
/// result does not depend on execution order.
pub fn train_clients(
    state: &GlobalState,
    fed: &Federation<'_>,
    cfg: &RoundConfig,
    sampled: &[usize],
    exec: Execution,
) -> Result<Vec<ClientUpdate>> {
    let train_one = |&k: &usize| {
        local_train(
            &state.params,
            fed.spec,
            fed.client(k),
            &cfg.sgd,
            client_seed(cfg.seed, k, state.round),
        )
    };
    match exec {
        Execution::Sequential => sampled.iter().map(train_one).collect(),
        Execution::Parallel => sampled.par_iter().map(train_one).collect(),
    }
}

/// Weights and aggregates a round's updates into the next global state.
pub fn finish_round(
    state: &GlobalState,
    rule: &AggregationRule,
    updates: &[ClientUpdate],
) -> Result<RoundOutcome> {
    let distances = updates
        .iter()
        .map(|u| model_sq_distance(&u.params, &state.params).map_err(|e| e.for_client(u.client_id)))
        .collect::<Result<Vec<_>>>()?;
    let weights = compute_weights(rule, updates, &state.params)?.with_distances(&distances);
    let params = aggregate(updates, &weights)?;
    if !params.is_finite() {
        return Err(Error::validation("aggregated global model is not finite"));
    }
    let losses: Vec<f64> = updates.iter().map(|u| u.mean_train_loss).collect();
    let metrics = RoundMetrics {
        sampled: updates.iter().map(|u| u.client_id).collect(),
        global_train_loss: global_loss(&losses, &weights)?,
        mean_sq_distance: distances.iter().sum::<f64>() / distances.len() as f64,
        min_weight: weights.min_weight(),
        max_weight: weights.max_weight(),
        weight_entropy: weights.entropy(),
    };
    Ok(RoundOutcome {
        state: GlobalState {
            round: state.round + 1,
            params,
        },
        weights,
        metrics,
    })
}

/// One communication round: sample, train locally, weight, aggregate.
///
/// Any failing client aborts the whole round.
pub fn run_round(
    state: &GlobalState,
    rule: &AggregationRule,
    fed: &Federation<'_>,
    cfg: &RoundConfig,
    exec: Execution,
) -> Result<RoundOutcome> {
    if !state.params.is_finite() {
        return Err(Error::validation("global model is not finite"));
    }
    if state.params.len() != fed.spec.param_count() {
        return Err(Error::shape(format!(
            "global model has {} parameters, spec needs {}",
            state.params.len(),
            fed.spec.param_count()
        )));
    }
    let sampled = sample_clients(fed.num_clients(), cfg.sample_rate, state.round, cfg.seed)?;
    let updates = train_clients(state, fed, cfg, &sampled, exec)?;
    finish_round(state, rule, &updates)
}
