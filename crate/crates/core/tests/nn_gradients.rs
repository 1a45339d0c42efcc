use fedba::nn::{
    backward, cross_entropy_loss, finite_diff_gradient, forward, init_model, loss_and_gradient, sgd_step,
    GradientSet, LayerSpec, Model, ModelSpec, ParamVector, Shape, Tensor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn jittered(spec: &ModelSpec, seed: u64) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = init_model(spec, seed).unwrap();
    let p: Vec<f64> = model
        .params()
        .as_slice()
        .iter()
        .map(|v| v + rng.random_range(-0.2..0.2))
        .collect();
    model.set_params(ParamVector::new(p)).unwrap();
    model
}

fn random_batch(rng: &mut ChaCha8Rng, n: usize, h: usize, w: usize, c: usize, classes: usize) -> (Tensor, Vec<usize>) {
    let data = (0..n * h * w * c).map(|_| rng.random_range(-1.0..1.0)).collect();
    let labels = (0..n).map(|_| rng.random_range(0..classes)).collect();
    (Tensor::new(vec![n, h, w, c], data).unwrap(), labels)
}

fn max_abs_diff(a: &GradientSet, b: &GradientSet) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn small_cnn() -> ModelSpec {
    ModelSpec::new(
        Shape::Image {
            channels: 2,
            height: 6,
            width: 6,
        },
        vec![
            LayerSpec::Conv2d {
                in_channels: 2,
                out_channels: 3,
                kernel: 3,
                padding: 1,
            },
            LayerSpec::Relu,
            LayerSpec::MaxPool2d { window: 2 },
            LayerSpec::Flatten,
            LayerSpec::Dense { inputs: 27, outputs: 4 },
        ],
    )
    .unwrap()
}

#[test]
fn small_cnn_matches_central_differences() {
    let spec = small_cnn();
    let model = jittered(&spec, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (x, y) = random_batch(&mut rng, 3, 6, 6, 2, 4);
    let (_, cache) = forward(&model, &x).unwrap();
    let analytic = backward(&model, &cache, &y).unwrap();
    let numeric = finite_diff_gradient(&model, &x, &y, 1e-5).unwrap();
    assert!(fedba::nn::max_relative_error(&analytic, &numeric, 1e-8) < 1e-4);
}

#[test]
fn halving_step_reduces_finite_difference_error() {
    // A smooth (ReLU-free) net, so the truncation term dominates at h=1e-4.
    let spec = ModelSpec::new(
        Shape::Flat(5),
        vec![
            LayerSpec::Dense { inputs: 5, outputs: 4 },
            LayerSpec::Dense { inputs: 4, outputs: 3 },
        ],
    )
    .unwrap();
    let model = jittered(&spec, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = Tensor::new(vec![4, 5], (0..20).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
    let y = vec![0, 1, 2, 1];
    let (_, analytic) = loss_and_gradient(&model, &x, &y).unwrap();
    let coarse = max_abs_diff(&analytic, &finite_diff_gradient(&model, &x, &y, 1e-4).unwrap());
    let fine = max_abs_diff(&analytic, &finite_diff_gradient(&model, &x, &y, 1e-5).unwrap());
    assert!(fine < coarse, "h=1e-5 error {fine:e} not below h=1e-4 error {coarse:e}");
}

#[test]
fn parameters_without_influence_have_zero_estimates() {
    // All-zero inputs: first-layer weights cannot affect the loss.
    let spec = ModelSpec::new(Shape::Flat(3), vec![LayerSpec::Dense { inputs: 3, outputs: 2 }]).unwrap();
    let model = jittered(&spec, 3);
    let x = Tensor::zeros(vec![2, 3]);
    let y = vec![0, 1];
    let numeric = finite_diff_gradient(&model, &x, &y, 1e-5).unwrap();
    let (_, analytic) = loss_and_gradient(&model, &x, &y).unwrap();
    for i in 0..6 {
        assert!(numeric.as_slice()[i].abs() <= 1e-7);
        assert_eq!(analytic.as_slice()[i], 0.0);
    }
}

#[test]
fn one_sgd_step_lowers_the_batch_loss() {
    let spec = small_cnn();
    let model = jittered(&spec, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (x, y) = random_batch(&mut rng, 8, 6, 6, 2, 4);
    let (before, grads) = loss_and_gradient(&model, &x, &y).unwrap();
    let stepped = Model::new(spec, sgd_step(model.params(), &grads, 1e-2).unwrap()).unwrap();
    let (logits, _) = forward(&stepped, &x).unwrap();
    assert!(cross_entropy_loss(&logits, &y).unwrap() < before);
}

#[test]
fn cnn6_shapes_for_each_dataset() {
    let mnist = ModelSpec::cnn6(1, 28, 28, 10).unwrap();
    assert_eq!(mnist.param_count(), 215_370);
    let cifar = ModelSpec::cnn6(3, 32, 32, 100).unwrap();
    assert_eq!(cifar.output_len().unwrap(), 100);

    let model = init_model(&mnist, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (x, y) = random_batch(&mut rng, 2, 28, 28, 1, 10);
    let (logits, cache) = forward(&model, &x).unwrap();
    assert_eq!(logits.shape(), &[2, 10]);
    assert_eq!(backward(&model, &cache, &y).unwrap().len(), 215_370);
}
