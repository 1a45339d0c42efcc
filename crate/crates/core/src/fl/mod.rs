//! The federated round engine.

mod aggregate;
mod client;
mod distance;
mod eval;
mod round;
mod sampling;
mod weights;

pub use aggregate::{aggregate, global_loss, SIMPLEX_TOL};
pub use client::{local_train, ClientData};
pub use distance::{distance_transform, g, model_sq_distance};
pub use eval::{argmax, evaluate};
pub use round::{
    client_seed, finish_round, run_round, train_clients, Execution, Federation, GlobalState,
    RoundConfig, RoundMetrics, RoundOutcome,
};
pub use sampling::{clients_per_round, sample_clients};
pub use weights::{
    compute_weights, fedavg_weights, fedba_weights, fedba_weights_from_distances,
    AggregationRule, ClientUpdate, ClientWeight, FedBaGuard, WeightReport,
};
