//! Dataset loading and client partitioning.

mod batches;
mod cifar;
mod dataset;
mod idx;
mod partition;

use std::io::Read;
use std::path::Path;

pub use batches::{batch_indices, batches, Batches};
pub use cifar::{load_cifar100, parse_cifar100, NUM_FINE_LABELS, RECORD_LEN};
pub use dataset::Dataset;
pub use idx::{encode_idx, load_idx, parse_idx, parse_idx_pair, IMAGES_MAGIC, LABELS_MAGIC};
pub use partition::{
    dirichlet_partition, histogram_entropy, largest_remainder, DirichletConfig, PartitionPlan,
};

use crate::error::{Error, Result};

/// Reads a file, transparently inflating it when it starts with the gzip
/// magic `1F 8B`.
pub fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1F, 0x8B]) {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}
