//! IDX reader for MNIST and Fashion-MNIST.
//!
//! Header: a big-endian magic (`0x00000803` images, `0x00000801` labels)
//! followed by one big-endian `u32` per dimension, then raw bytes.

use std::path::Path;

use super::dataset::Dataset;
use super::read_maybe_gz;
use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::format(offset as u64, "file ends inside the header"))
}

/// Parses an IDX file with the given magic, returning its dimensions and
/// payload.
pub fn parse_idx(bytes: &[u8], magic: u32) -> Result<(Vec<usize>, &[u8])> {
    let found = be_u32(bytes, 0)?;
    if found != magic {
        return Err(Error::format(
            0,
            format!("bad magic number {found:#010x}, expected {magic:#010x}"),
        ));
    }
    let ndim = (magic & 0xFF) as usize;
    let dims = (0..ndim)
        .map(|d| be_u32(bytes, 4 + 4 * d).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let header = 4 + 4 * ndim;
    let expected: usize = dims.iter().product();
    let payload = &bytes[header..];
    if payload.len() < expected {
        return Err(Error::format(
            bytes.len() as u64,
            format!(
                "truncated: header promises {expected} data bytes, found {}",
                payload.len()
            ),
        ));
    }
    if payload.len() > expected {
        return Err(Error::format(
            (header + expected) as u64,
            format!("{} trailing bytes after data", payload.len() - expected),
        ));
    }
    Ok((dims, payload))
}

/// Builds a dataset from in-memory IDX image and label files.
pub fn parse_idx_pair(images: &[u8], labels: &[u8]) -> Result<Dataset> {
    let (img_dims, pixels) = parse_idx(images, IMAGES_MAGIC)?;
    let (lab_dims, label_bytes) = parse_idx(labels, LABELS_MAGIC)?;
    if img_dims[0] != lab_dims[0] {
        return Err(Error::format(
            4,
            format!(
                "image file holds {} items but label file holds {}",
                img_dims[0], lab_dims[0]
            ),
        ));
    }
    if let Some(pos) = label_bytes.iter().position(|&l| l >= 10) {
        return Err(Error::format(
            8 + pos as u64,
            format!("label {} outside 0..10", label_bytes[pos]),
        ));
    }
    Dataset::new(
        pixels.to_vec(),
        label_bytes.iter().map(|&l| usize::from(l)).collect(),
        (img_dims[1], img_dims[2], 1),
        10,
    )
}

/// Loads an IDX image/label pair (plain or gzip).
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let images = read_maybe_gz(images_path.as_ref())?;
    let labels = read_maybe_gz(labels_path.as_ref())?;
    parse_idx_pair(&images, &labels)
}

/// Serialises a single-channel dataset back to IDX `(images, labels)`.
pub fn encode_idx(ds: &Dataset) -> (Vec<u8>, Vec<u8>) {
    let (h, w, _) = ds.image_dims();
    let n = ds.len() as u32;
    let mut images = Vec::with_capacity(16 + ds.len() * h * w);
    images.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    images.extend_from_slice(&n.to_be_bytes());
    images.extend_from_slice(&(h as u32).to_be_bytes());
    images.extend_from_slice(&(w as u32).to_be_bytes());
    for i in 0..ds.len() {
        images.extend_from_slice(ds.image_bytes(i));
    }
    let mut labels = Vec::with_capacity(8 + ds.len());
    labels.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    labels.extend_from_slice(&n.to_be_bytes());
    labels.extend(ds.labels().iter().map(|&l| l as u8));
    (images, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> (Vec<u8>, Vec<u8>) {
        let ds = Dataset::new((0..8).collect(), vec![3, 9], (2, 2, 1), 10).unwrap();
        encode_idx(&ds)
    }

    #[test]
    fn parses_header_and_scales() {
        let (img, lab) = tiny();
        let ds = parse_idx_pair(&img, &lab).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.image_dims(), (2, 2, 1));
        assert_eq!(ds.labels(), &[3, 9]);
        assert_eq!(ds.num_classes(), 10);
        assert_eq!(ds.image_bytes(1), &[4, 5, 6, 7]);
    }

    #[test]
    fn bad_label_magic() {
        let (img, mut lab) = tiny();
        lab[3] = 0x03;
        let err = parse_idx_pair(&img, &lab).unwrap_err();
        assert!(matches!(err, Error::Format { offset: 0, .. }), "{err}");
    }

    #[test]
    fn truncated_images() {
        let (img, lab) = tiny();
        let err = parse_idx_pair(&img[..img.len() - 1], &lab).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
        assert!(parse_idx_pair(&img[..6], &lab).is_err());
    }

    #[test]
    fn count_mismatch() {
        let (img, _) = tiny();
        let one = Dataset::new(vec![0; 4], vec![1], (2, 2, 1), 10).unwrap();
        let (_, lab) = encode_idx(&one);
        assert!(matches!(
            parse_idx_pair(&img, &lab),
            Err(Error::Format { offset: 4, .. })
        ));
    }
}
