//! Deterministic federated-learning simulator.
//!
//! The crate is split the same way a round is:
//!
//! * [`nn`] is a small dense/convolutional network engine with analytic
//!   backpropagation and plain SGD.
//! * [`data`] loads IDX (MNIST, Fashion-MNIST) and CIFAR-100 binaries and
//!   splits a training set across clients with Dirichlet label skew.
//! * [`fl`] is the round engine: client sampling, local training, FedBA and
//!   FedAvg weighting, and aggregation.
//! * [`harness`] drives whole experiments from a config and writes the
//!   per-round metrics CSV.
//!
//! Every random choice is drawn from a ChaCha stream keyed by the master seed
//! and the role of the draw (round, client, epoch), so a run is a pure
//! function of its configuration.

pub mod data;
pub mod error;
pub mod fl;
pub mod harness;
pub mod nn;
pub mod rng;

pub use error::{Error, Result};
