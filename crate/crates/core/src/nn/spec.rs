use std::fmt;

use crate::error::{Error, Result};

/// Per-sample activation shape. Images are channel-major internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Image {
        channels: usize,
        height: usize,
        width: usize,
    },
    Flat(usize),
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::Image {
                channels,
                height,
                width,
            } => channels * height * width,
            Shape::Flat(n) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Image {
                channels,
                height,
                width,
            } => write!(f, "{channels}x{height}x{width}"),
            Shape::Flat(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    Dense {
        inputs: usize,
        outputs: usize,
    },
    /// Stride-1 convolution with symmetric zero padding.
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        padding: usize,
    },
    /// Non-overlapping max pooling (stride equals window).
    MaxPool2d {
        window: usize,
    },
    Relu,
    Flatten,
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerSpec::Dense { inputs, outputs } => write!(f, "Dense({inputs}->{outputs})"),
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                padding,
            } => write!(
                f,
                "Conv2d({in_channels}->{out_channels}, k={kernel}, pad={padding})"
            ),
            LayerSpec::MaxPool2d { window } => write!(f, "MaxPool2d({window})"),
            LayerSpec::Relu => f.write_str("ReLU"),
            LayerSpec::Flatten => f.write_str("Flatten"),
        }
    }
}

impl LayerSpec {
    /// Number of (weight, bias) entries this layer owns.
    pub fn param_counts(&self) -> (usize, usize) {
        match *self {
            LayerSpec::Dense { inputs, outputs } => (inputs * outputs, outputs),
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => (out_channels * in_channels * kernel * kernel, out_channels),
            _ => (0, 0),
        }
    }

    pub fn fan_in(&self) -> usize {
        match *self {
            LayerSpec::Dense { inputs, .. } => inputs,
            LayerSpec::Conv2d {
                in_channels,
                kernel,
                ..
            } => in_channels * kernel * kernel,
            _ => 0,
        }
    }

    /// Output shape for `input`, or `None` when the layer cannot consume it.
    pub fn output_shape(&self, input: Shape) -> Option<Shape> {
        match (*self, input) {
            (LayerSpec::Dense { inputs, outputs }, Shape::Flat(n)) if n == inputs && outputs > 0 => {
                Some(Shape::Flat(outputs))
            }
            (
                LayerSpec::Conv2d {
                    in_channels,
                    out_channels,
                    kernel,
                    padding,
                },
                Shape::Image {
                    channels,
                    height,
                    width,
                },
            ) if channels == in_channels
                && out_channels > 0
                && kernel > 0
                && height + 2 * padding >= kernel
                && width + 2 * padding >= kernel =>
            {
                Some(Shape::Image {
                    channels: out_channels,
                    height: height + 2 * padding - kernel + 1,
                    width: width + 2 * padding - kernel + 1,
                })
            }
            (
                LayerSpec::MaxPool2d { window },
                Shape::Image {
                    channels,
                    height,
                    width,
                },
            ) if window > 0 && height >= window && width >= window => Some(Shape::Image {
                channels,
                height: height / window,
                width: width / window,
            }),
            (LayerSpec::Relu, s) => Some(s),
            (LayerSpec::Flatten, s) => Some(Shape::Flat(s.len())),
            _ => None,
        }
    }
}

/// Layer architecture of a model, applied in order to inputs of shape `input`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub input: Shape,
    pub layers: Vec<LayerSpec>,
}

impl ModelSpec {
    pub fn new(input: Shape, layers: Vec<LayerSpec>) -> Result<Self> {
        let spec = ModelSpec { input, layers };
        spec.shapes()?;
        Ok(spec)
    }

    /// Activation shapes: `shapes()[0]` is the input, `shapes()[i + 1]` the
    /// output of layer `i`.
    pub fn shapes(&self) -> Result<Vec<Shape>> {
        if self.input.is_empty() {
            return Err(Error::shape("model input shape is empty"));
        }
        if self.layers.is_empty() {
            return Err(Error::shape("model has no layers"));
        }
        let mut shapes = Vec::with_capacity(self.layers.len() + 1);
        shapes.push(self.input);
        for (i, layer) in self.layers.iter().enumerate() {
            let prev = *shapes.last().unwrap();
            let next = layer.output_shape(prev).ok_or_else(|| {
                let producer = if i == 0 {
                    "model input".to_string()
                } else {
                    format!("layer {} ({})", i - 1, self.layers[i - 1])
                };
                Error::shape(format!(
                    "{producer} emits shape {prev} which layer {i} ({layer}) cannot consume"
                ))
            })?;
            shapes.push(next);
        }
        match shapes.last() {
            Some(Shape::Flat(_)) => Ok(shapes),
            Some(other) => Err(Error::shape(format!(
                "final layer must produce a flat class vector, got {other}"
            ))),
            None => unreachable!(),
        }
    }

    /// Size of the logit vector.
    pub fn output_len(&self) -> Result<usize> {
        Ok(self.shapes()?.last().map(Shape::len).unwrap_or(0))
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| {
                let (w, b) = l.param_counts();
                w + b
            })
            .sum()
    }

    /// Offset of each layer's first parameter in the flat parameter vector.
    pub fn param_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut acc = 0;
        for l in &self.layers {
            offsets.push(acc);
            let (w, b) = l.param_counts();
            acc += w + b;
        }
        offsets
    }

    /// Checks that the model emits exactly `num_classes` logits.
    pub fn check_classes(&self, num_classes: usize) -> Result<()> {
        let out = self.output_len()?;
        if out != num_classes {
            return Err(Error::shape(format!(
                "model emits {out} logits but the dataset has {num_classes} classes"
            )));
        }
        Ok(())
    }

    /// Two conv+pool stages followed by two dense layers.
    pub fn cnn6(channels: usize, height: usize, width: usize, classes: usize) -> Result<Self> {
        let flat = 32 * (height / 2 / 2) * (width / 2 / 2);
        ModelSpec::new(
            Shape::Image {
                channels,
                height,
                width,
            },
            vec![
                LayerSpec::Conv2d {
                    in_channels: channels,
                    out_channels: 16,
                    kernel: 5,
                    padding: 2,
                },
                LayerSpec::Relu,
                LayerSpec::MaxPool2d { window: 2 },
                LayerSpec::Conv2d {
                    in_channels: 16,
                    out_channels: 32,
                    kernel: 5,
                    padding: 2,
                },
                LayerSpec::Relu,
                LayerSpec::MaxPool2d { window: 2 },
                LayerSpec::Flatten,
                LayerSpec::Dense {
                    inputs: flat,
                    outputs: 128,
                },
                LayerSpec::Relu,
                LayerSpec::Dense {
                    inputs: 128,
                    outputs: classes,
                },
            ],
        )
    }

    /// Flatten, one hidden layer of 128 ReLU units, linear output.
    pub fn mlp(channels: usize, height: usize, width: usize, classes: usize) -> Result<Self> {
        let input = Shape::Image {
            channels,
            height,
            width,
        };
        ModelSpec::new(
            input,
            vec![
                LayerSpec::Flatten,
                LayerSpec::Dense {
                    inputs: input.len(),
                    outputs: 128,
                },
                LayerSpec::Relu,
                LayerSpec::Dense {
                    inputs: 128,
                    outputs: classes,
                },
            ],
        )
    }
}
