use rand::seq::SliceRandom;

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::nn::Tensor;
use crate::rng::{stream_rng, Stream};

/// Shuffles `indices` with a seeded RNG and cuts them into batches of
/// `batch_size`; the final batch may be shorter.
pub fn batch_indices(indices: &[usize], batch_size: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(Error::validation("batch size must be at least 1"));
    }
    if indices.is_empty() {
        return Err(Error::validation("cannot batch an empty index set"));
    }
    let mut order = indices.to_vec();
    order.shuffle(&mut stream_rng(seed, Stream::Epoch, &[]));
    Ok(order.chunks(batch_size).map(<[usize]>::to_vec).collect())
}

/// One shuffled epoch over `indices`.
pub struct Batches<'a> {
    dataset: &'a Dataset,
    plan: std::vec::IntoIter<Vec<usize>>,
}

impl Iterator for Batches<'_> {
    type Item = (Tensor, Vec<usize>);

    fn next(&mut self) -> Option<Self::Item> {
        let idx = self.plan.next()?;
        Some(
            self.dataset
                .batch(&idx)
                .expect("indices were range-checked when the epoch was built"),
        )
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.plan.size_hint()
    }
}

impl ExactSizeIterator for Batches<'_> {}

pub fn batches<'a>(dataset: &'a Dataset, indices: &[usize], batch_size: usize, seed: u64) -> Result<Batches<'a>> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= dataset.len()) {
        return Err(Error::validation(format!(
            "sample index {bad} out of range for {} samples",
            dataset.len()
        )));
    }
    Ok(Batches {
        dataset,
        plan: batch_indices(indices, batch_size, seed)?.into_iter(),
    })
}
