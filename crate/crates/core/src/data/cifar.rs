//! CIFAR-100 binary reader. Each record is one coarse-label byte, one
//! fine-label byte and 3072 channel-major pixel bytes.

use std::path::Path;

use super::dataset::Dataset;
use super::read_maybe_gz;
use crate::error::{Error, Result};

pub const RECORD_LEN: usize = 2 + 3 * 32 * 32;
pub const NUM_FINE_LABELS: usize = 100;

/// Parses CIFAR-100 records, keeping fine labels and converting pixels to
/// HWC order.
pub fn parse_cifar100(bytes: &[u8]) -> Result<Dataset> {
    if !bytes.len().is_multiple_of(RECORD_LEN) {
        return Err(Error::format(
            (bytes.len() - bytes.len() % RECORD_LEN) as u64,
            format!(
                "file size {} is not a multiple of the {RECORD_LEN}-byte record",
                bytes.len()
            ),
        ));
    }
    let n = bytes.len() / RECORD_LEN;
    let plane = 32 * 32;
    let mut pixels = vec![0u8; n * 3 * plane];
    let mut labels = Vec::with_capacity(n);
    for (r, rec) in bytes.chunks_exact(RECORD_LEN).enumerate() {
        let fine = rec[1] as usize;
        if fine >= NUM_FINE_LABELS {
            return Err(Error::format(
                (r * RECORD_LEN + 1) as u64,
                format!("fine label {fine} outside 0..100"),
            ));
        }
        labels.push(fine);
        let src = &rec[2..];
        let dst = &mut pixels[r * 3 * plane..(r + 1) * 3 * plane];
        for c in 0..3 {
            for p in 0..plane {
                dst[p * 3 + c] = src[c * plane + p];
            }
        }
    }
    Dataset::new(pixels, labels, (32, 32, 3), NUM_FINE_LABELS)
}

/// Loads the CIFAR-100 `train.bin` / `test.bin` pair (plain or gzip).
pub fn load_cifar100(train_path: impl AsRef<Path>, test_path: impl AsRef<Path>) -> Result<(Dataset, Dataset)> {
    let train = parse_cifar100(&read_maybe_gz(train_path.as_ref())?)?;
    let test = parse_cifar100(&read_maybe_gz(test_path.as_ref())?)?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(coarse: u8, fine: u8, fill: impl Fn(usize) -> u8) -> Vec<u8> {
        let mut r = vec![coarse, fine];
        r.extend((0..3072).map(fill));
        r
    }

    #[test]
    fn fine_labels_and_hwc_layout() {
        let mut bytes = record(4, 77, |i| (i / 1024) as u8 * 100);
        bytes.extend(record(1, 3, |_| 9));
        let ds = parse_cifar100(&bytes).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.labels(), &[77, 3]);
        assert_eq!(ds.num_classes(), 100);
        assert_eq!(ds.image_dims(), (32, 32, 3));
        assert_eq!(&ds.image_bytes(0)[..6], &[0, 100, 200, 0, 100, 200]);
    }

    #[test]
    fn truncated_file() {
        let bytes = record(0, 0, |_| 0);
        assert!(matches!(
            parse_cifar100(&bytes[..3000]),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn fine_label_range() {
        let bytes = record(0, 100, |_| 0);
        assert!(parse_cifar100(&bytes).is_err());
    }
}
