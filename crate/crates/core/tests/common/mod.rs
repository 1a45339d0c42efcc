#![allow(dead_code)]

use std::path::PathBuf;

use fedba::data::{load_idx, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The bundled 10,000-digit MNIST sample (8000 train / 2000 test).
pub fn mnist_sample_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-sample")
}

pub fn mnist_sample() -> (Dataset, Dataset) {
    let dir = mnist_sample_dir();
    let train = load_idx(
        dir.join("train-images-idx3-ubyte.gz"),
        dir.join("train-labels-idx1-ubyte.gz"),
    )
    .expect("bundled MNIST train sample");
    let test = load_idx(
        dir.join("t10k-images-idx3-ubyte.gz"),
        dir.join("t10k-labels-idx1-ubyte.gz"),
    )
    .expect("bundled MNIST test sample");
    (train, test)
}

/// Random images whose class is readable from a bright pixel, so that small
/// models can learn them.
pub fn synthetic(n: usize, dims: (usize, usize, usize), classes: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = dims.0 * dims.1 * dims.2;
    let mut pixels = Vec::with_capacity(n * per);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let label = rng.random_range(0..classes);
        let mut img: Vec<u8> = (0..per).map(|_| rng.random_range(0..64)).collect();
        img[label % per] = 255;
        pixels.extend(img);
        labels.push(label);
    }
    Dataset::new(pixels, labels, dims, classes).unwrap()
}
