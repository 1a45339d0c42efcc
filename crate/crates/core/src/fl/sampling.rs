use rand::seq::index;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Number of clients per round, `max(floor(C·K), 1)`.
///
/// A 1e-9 slack absorbs products such as `0.29 * 100 = 28.999999999999996`.
pub fn clients_per_round(num_clients: usize, sample_rate: f64) -> usize {
    let m = (sample_rate * num_clients as f64 + 1e-9).floor() as usize;
    m.clamp(1, num_clients.max(1))
}

/// Distinct client ids for round `round`, ascending. The draw depends only
/// on `(seed, round)`.
pub fn sample_clients(num_clients: usize, sample_rate: f64, round: u64, seed: u64) -> Result<Vec<usize>> {
    if num_clients == 0 {
        return Err(Error::validation("need at least one client"));
    }
    if !(sample_rate > 0.0 && sample_rate <= 1.0) {
        return Err(Error::validation(format!(
            "sampling rate must lie in (0, 1], got {sample_rate}"
        )));
    }
    let m = clients_per_round(num_clients, sample_rate);
    let mut rng = stream_rng(seed, Stream::Sampling, &[round]);
    let mut ids = index::sample(&mut rng, num_clients, m).into_vec();
    ids.sort_unstable();
    Ok(ids)
}
