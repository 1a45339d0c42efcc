use rand::distr::{Distribution, Uniform};

use super::loss::{check_labels, softmax_into};
use super::ops::{col2im, gemm, im2col, ConvGeom, Mat};
use super::params::{GradientSet, ParamVector};
use super::spec::{LayerSpec, ModelSpec, Shape};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// A network architecture together with its current parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    params: ParamVector,
}

impl Model {
    pub fn new(spec: ModelSpec, params: ParamVector) -> Result<Self> {
        spec.shapes()?;
        if params.len() != spec.param_count() {
            return Err(Error::shape(format!(
                "spec needs {} parameters, got {}",
                spec.param_count(),
                params.len()
            )));
        }
        Ok(Model { spec, params })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn params(&self) -> &ParamVector {
        &self.params
    }

    pub fn into_params(self) -> ParamVector {
        self.params
    }

    /// Replaces the parameters, keeping the architecture.
    pub fn set_params(&mut self, params: ParamVector) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::shape(format!(
                "spec needs {} parameters, got {}",
                self.params.len(),
                params.len()
            )));
        }
        self.params = params;
        Ok(())
    }

    /// Weight and bias slices of layer `i` (empty for parameter-free layers).
    pub fn layer_params(&self, i: usize) -> (&[f64], &[f64]) {
        let offset = self.spec.param_offsets()[i];
        let (w, b) = self.spec.layers[i].param_counts();
        let p = self.params.as_slice();
        (&p[offset..offset + w], &p[offset + w..offset + w + b])
    }

    /// Per-layer `(weights, biases)` copies.
    pub fn to_layers(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..self.spec.layers.len())
            .map(|i| {
                let (w, b) = self.layer_params(i);
                (w.to_vec(), b.to_vec())
            })
            .collect()
    }

    /// Inverse of [`Model::to_layers`].
    pub fn from_layers(spec: ModelSpec, layers: &[(Vec<f64>, Vec<f64>)]) -> Result<Self> {
        if layers.len() != spec.layers.len() {
            return Err(Error::shape(format!(
                "spec has {} layers, got {}",
                spec.layers.len(),
                layers.len()
            )));
        }
        let mut flat = Vec::with_capacity(spec.param_count());
        for (i, (layer, (w, b))) in spec.layers.iter().zip(layers).enumerate() {
            if layer.param_counts() != (w.len(), b.len()) {
                return Err(Error::shape(format!(
                    "layer {i} ({layer}) expects {:?} parameters, got ({}, {})",
                    layer.param_counts(),
                    w.len(),
                    b.len()
                )));
            }
            flat.extend_from_slice(w);
            flat.extend_from_slice(b);
        }
        Model::new(spec, ParamVector::new(flat))
    }
}

/// Draws weights uniformly from `[-sqrt(6/fan_in), sqrt(6/fan_in)]` with
/// zero biases.
pub fn init_model(spec: &ModelSpec, seed: u64) -> Result<Model> {
    spec.shapes()?;
    let mut rng = stream_rng(seed, Stream::Init, &[]);
    let mut params = Vec::with_capacity(spec.param_count());
    for layer in &spec.layers {
        let (w, b) = layer.param_counts();
        if w > 0 {
            let bound = (6.0 / layer.fan_in() as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound)
                .map_err(|e| Error::validation(format!("{layer}: {e}")))?;
            params.extend((0..w).map(|_| dist.sample(&mut rng)));
        }
        params.extend(std::iter::repeat_n(0.0, b));
    }
    Model::new(spec.clone(), ParamVector::new(params))
}

/// Per-layer state recorded by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ActivationCache {
    /// Input activations of each layer, batch-major.
    inputs: Vec<Vec<f64>>,
    /// For pooling layers, the within-sample index of each window's maximum.
    argmax: Vec<Vec<u32>>,
    logits: Tensor,
    batch: usize,
    fingerprint: u64,
}

impl ActivationCache {
    pub fn logits(&self) -> &Tensor {
        &self.logits
    }

    pub fn batch_size(&self) -> usize {
        self.batch
    }
}

fn fingerprint(params: &[f64]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325 ^ params.len() as u64;
    for v in params {
        h = (h ^ v.to_bits()).wrapping_mul(0x0000_0100_0000_01B3);
        h ^= h >> 29;
    }
    h
}

/// Converts an NHWC (or already flat) batch into the model's internal
/// channel-major layout.
fn prepare_input(spec: &ModelSpec, batch: &Tensor) -> Result<Vec<f64>> {
    let shape = batch.shape();
    if shape.is_empty() || shape[0] == 0 {
        return Err(Error::shape("batch is empty"));
    }
    let b = shape[0];
    match spec.input {
        Shape::Image {
            channels,
            height,
            width,
        } => {
            if shape[1..] != [height, width, channels] {
                return Err(Error::shape(format!(
                    "batch shape {shape:?} does not match model input [N, {height}, {width}, {channels}]"
                )));
            }
            if channels == 1 {
                return Ok(batch.data().to_vec());
            }
            let plane = height * width;
            let mut out = vec![0.0; batch.len()];
            for s in 0..b {
                let src = batch.row(s);
                let dst = &mut out[s * plane * channels..(s + 1) * plane * channels];
                for (pix, px) in src.chunks_exact(channels).enumerate() {
                    for (c, v) in px.iter().enumerate() {
                        dst[c * plane + pix] = *v;
                    }
                }
            }
            Ok(out)
        }
        Shape::Flat(n) => {
            if shape[1..].iter().product::<usize>() != n {
                return Err(Error::shape(format!(
                    "batch shape {shape:?} does not match model input of {n} features"
                )));
            }
            Ok(batch.data().to_vec())
        }
    }
}

fn run(model: &Model, batch: &Tensor, keep: bool) -> Result<(Tensor, Option<ActivationCache>)> {
    let spec = &model.spec;
    let shapes = spec.shapes()?;
    let b = batch.batch_size();
    let mut x = prepare_input(spec, batch)?;
    let offsets = spec.param_offsets();
    let params = model.params.as_slice();
    let mut inputs = Vec::new();
    let mut argmax = Vec::new();

    for (i, layer) in spec.layers.iter().enumerate() {
        let in_shape = shapes[i];
        let out_shape = shapes[i + 1];
        let (nw, nb) = layer.param_counts();
        let w = &params[offsets[i]..offsets[i] + nw];
        let bias = &params[offsets[i] + nw..offsets[i] + nw + nb];
        let mut pool_idx = Vec::new();

        let y = match *layer {
            LayerSpec::Dense { inputs: n_in, outputs } => {
                let mut y = vec![0.0; b * outputs];
                gemm(
                    Mat::new(&x, b, n_in),
                    Mat::new(w, outputs, n_in).t(),
                    0.0,
                    &mut y,
                );
                for row in y.chunks_exact_mut(outputs) {
                    row.iter_mut().zip(bias).for_each(|(v, bb)| *v += bb);
                }
                y
            }
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                padding,
            } => {
                let Shape::Image { height, width, .. } = in_shape else {
                    unreachable!("validated by ModelSpec::shapes")
                };
                let g = ConvGeom {
                    in_channels,
                    height,
                    width,
                    kernel,
                    padding,
                };
                let (in_len, out_len) = (in_shape.len(), out_shape.len());
                let area = g.col_cols();
                let mut cols = vec![0.0; g.col_rows() * area];
                let mut y = vec![0.0; b * out_len];
                for s in 0..b {
                    im2col(&g, &x[s * in_len..(s + 1) * in_len], &mut cols);
                    let ys = &mut y[s * out_len..(s + 1) * out_len];
                    gemm(
                        Mat::new(w, out_channels, g.col_rows()),
                        Mat::new(&cols, g.col_rows(), area),
                        0.0,
                        ys,
                    );
                    for (plane, bb) in ys.chunks_exact_mut(area).zip(bias) {
                        plane.iter_mut().for_each(|v| *v += bb);
                    }
                }
                y
            }
            LayerSpec::MaxPool2d { window } => {
                let (
                    Shape::Image {
                        channels,
                        height,
                        width,
                    },
                    Shape::Image {
                        height: oh,
                        width: ow,
                        ..
                    },
                ) = (in_shape, out_shape)
                else {
                    unreachable!("validated by ModelSpec::shapes")
                };
                let (in_len, out_len) = (in_shape.len(), out_shape.len());
                let mut y = vec![0.0; b * out_len];
                pool_idx = vec![0u32; b * out_len];
                for s in 0..b {
                    let xs = &x[s * in_len..(s + 1) * in_len];
                    for c in 0..channels {
                        for oy in 0..oh {
                            for ox in 0..ow {
                                let mut best_i = c * height * width + oy * window * width + ox * window;
                                let mut best = xs[best_i];
                                for dy in 0..window {
                                    for dx in 0..window {
                                        let idx = c * height * width
                                            + (oy * window + dy) * width
                                            + ox * window
                                            + dx;
                                        if xs[idx] > best {
                                            best = xs[idx];
                                            best_i = idx;
                                        }
                                    }
                                }
                                let o = s * out_len + (c * oh + oy) * ow + ox;
                                y[o] = best;
                                pool_idx[o] = best_i as u32;
                            }
                        }
                    }
                }
                y
            }
            LayerSpec::Relu => x.iter().map(|v| v.max(0.0)).collect(),
            LayerSpec::Flatten => {
                if keep {
                    x.clone()
                } else {
                    std::mem::take(&mut x)
                }
            }
        };
        if keep {
            inputs.push(std::mem::replace(&mut x, y));
            argmax.push(pool_idx);
        } else {
            x = y;
        }
    }

    if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::validation(format!(
            "forward pass produced a non-finite logit at position {pos}"
        )));
    }
    let classes = shapes.last().map(Shape::len).unwrap_or(0);
    let logits = Tensor::from_parts(vec![b, classes], x);
    let cache = keep.then(|| ActivationCache {
        inputs,
        argmax,
        logits: logits.clone(),
        batch: b,
        fingerprint: fingerprint(params),
    });
    Ok((logits, cache))
}

/// Runs the network on an NHWC (or flat) batch, keeping what
/// [`backward`] needs.
pub fn forward(model: &Model, batch: &Tensor) -> Result<(Tensor, ActivationCache)> {
    let (logits, cache) = run(model, batch, true)?;
    Ok((logits, cache.expect("cache requested")))
}

/// Forward pass without recording activations.
pub fn predict(model: &Model, batch: &Tensor) -> Result<Tensor> {
    Ok(run(model, batch, false)?.0)
}

/// Analytic gradient of the mean cross-entropy loss.
pub fn backward(model: &Model, cache: &ActivationCache, labels: &[usize]) -> Result<GradientSet> {
    let spec = &model.spec;
    let params = model.params.as_slice();
    if cache.inputs.len() != spec.layers.len() || cache.fingerprint != fingerprint(params) {
        return Err(Error::validation(
            "activation cache was not produced by this model's parameters",
        ));
    }
    let b = cache.batch;
    let classes = cache.logits.shape()[1];
    if labels.len() != b {
        return Err(Error::validation(format!(
            "{} labels for a batch of {b}",
            labels.len()
        )));
    }
    check_labels(labels, classes)?;

    // d(mean CE)/d(logits) = (softmax - onehot) / B
    let mut dy = vec![0.0; b * classes];
    for (s, &label) in labels.iter().enumerate() {
        let row = &mut dy[s * classes..(s + 1) * classes];
        softmax_into(cache.logits.row(s), row);
        row[label] -= 1.0;
        row.iter_mut().for_each(|v| *v /= b as f64);
    }

    let shapes = spec.shapes()?;
    let offsets = spec.param_offsets();
    let mut grads = vec![0.0; params.len()];

    for (i, layer) in spec.layers.iter().enumerate().rev() {
        let x = &cache.inputs[i];
        let in_shape = shapes[i];
        let out_shape = shapes[i + 1];
        let need_dx = i > 0;
        let (nw, nb) = layer.param_counts();
        let (gw, gb) = grads[offsets[i]..offsets[i] + nw + nb].split_at_mut(nw);
        let w = &params[offsets[i]..offsets[i] + nw];

        let dx = match *layer {
            LayerSpec::Dense { inputs: n_in, outputs } => {
                gemm(
                    Mat::new(&dy, b, outputs).t(),
                    Mat::new(x, b, n_in),
                    0.0,
                    gw,
                );
                for row in dy.chunks_exact(outputs) {
                    gb.iter_mut().zip(row).for_each(|(g, d)| *g += d);
                }
                if need_dx {
                    let mut dx = vec![0.0; b * n_in];
                    gemm(Mat::new(&dy, b, outputs), Mat::new(w, outputs, n_in), 0.0, &mut dx);
                    dx
                } else {
                    Vec::new()
                }
            }
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                padding,
            } => {
                let Shape::Image { height, width, .. } = in_shape else {
                    unreachable!("validated by ModelSpec::shapes")
                };
                let g = ConvGeom {
                    in_channels,
                    height,
                    width,
                    kernel,
                    padding,
                };
                let (in_len, out_len) = (in_shape.len(), out_shape.len());
                let (rows, area) = (g.col_rows(), g.col_cols());
                let mut cols = vec![0.0; rows * area];
                let mut dcols = vec![0.0; rows * area];
                let mut dx = if need_dx { vec![0.0; b * in_len] } else { Vec::new() };
                for s in 0..b {
                    let dys = &dy[s * out_len..(s + 1) * out_len];
                    im2col(&g, &x[s * in_len..(s + 1) * in_len], &mut cols);
                    gemm(
                        Mat::new(dys, out_channels, area),
                        Mat::new(&cols, rows, area).t(),
                        1.0,
                        gw,
                    );
                    for (gbo, plane) in gb.iter_mut().zip(dys.chunks_exact(area)) {
                        *gbo += plane.iter().sum::<f64>();
                    }
                    if need_dx {
                        gemm(
                            Mat::new(w, out_channels, rows).t(),
                            Mat::new(dys, out_channels, area),
                            0.0,
                            &mut dcols,
                        );
                        col2im(&g, &dcols, &mut dx[s * in_len..(s + 1) * in_len]);
                    }
                }
                dx
            }
            LayerSpec::MaxPool2d { .. } => {
                let (in_len, out_len) = (in_shape.len(), out_shape.len());
                let mut dx = vec![0.0; b * in_len];
                for (o, (&src, d)) in cache.argmax[i].iter().zip(&dy).enumerate() {
                    let s = o / out_len;
                    dx[s * in_len + src as usize] += d;
                }
                dx
            }
            LayerSpec::Relu => x
                .iter()
                .zip(&dy)
                .map(|(xi, d)| if *xi > 0.0 { *d } else { 0.0 })
                .collect(),
            LayerSpec::Flatten => std::mem::take(&mut dy),
        };
        dy = dx;
    }
    Ok(GradientSet::new(grads))
}
