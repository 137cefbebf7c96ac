//! Feed-forward ReLU classifier with hand-derived backward passes.
//!
//! `affine → ReLU → affine → … → affine`, producing one logit per class.
//! A residual network is the usual choice for CIFAR-scale experiments; this
//! crate deliberately stays with a multilayer perceptron, since the loss
//! under study only sees the logits.

use crate::error::{invalid, Error, Result};
use crate::numeric::{check_finite, Matrix, Rng};

/// One dense layer `y = x W + b` with `W` of shape `(in_dim, out_dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineLayer {
    weights: Matrix,
    bias: Vec<f64>,
}

impl AffineLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.cols() {
            return Err(Error::ShapeMismatch {
                left: weights.shape(),
                right: (1, bias.len()),
                context: "bias length must equal out_dim",
            });
        }
        check_finite(&bias)?;
        Ok(Self { weights, bias })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn in_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.cols()
    }

    fn apply(&self, x: &Matrix) -> Result<Matrix> {
        x.matmul(&self.weights)?.add_row_broadcast(&self.bias)
    }
}

#[derive(Debug, Clone)]
struct ForwardCache {
    /// Input to each affine layer.
    inputs: Vec<Matrix>,
    /// Pre-activation output of each hidden layer (all but the last).
    pre_activations: Vec<Matrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Mean-reduced gradients for every layer, in layer order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub layers: Vec<LayerGrads>,
}

impl ParamGrads {
    /// Flat views in the same order as [`MlpModel::params_mut`].
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.data(), l.bias.as_slice()])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Weight,
    Bias,
}

/// Mutable view of one parameter tensor.
#[derive(Debug)]
pub struct ParamMut<'a> {
    pub kind: ParamKind,
    pub values: &'a mut [f64],
}

#[derive(Debug, Clone)]
pub struct MlpModel {
    layers: Vec<AffineLayer>,
    cache: Option<ForwardCache>,
}

impl MlpModel {
    pub fn from_layers(layers: Vec<AffineLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("model needs at least one layer"));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::ShapeMismatch {
                    left: pair[0].weights.shape(),
                    right: pair[1].weights.shape(),
                    context: "adjacent layer dimensions",
                });
            }
        }
        Ok(Self { layers, cache: None })
    }

    pub fn layers(&self) -> &[AffineLayer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn num_classes(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(AffineLayer::out_dim))
            .collect()
    }

    /// Logits for `batch` (rows are samples); caches what [`Self::backward`] needs.
    pub fn forward(&mut self, batch: &Matrix) -> Result<Matrix> {
        let mut cache = ForwardCache {
            inputs: Vec::with_capacity(self.layers.len()),
            pre_activations: Vec::with_capacity(self.layers.len() - 1),
        };
        let logits = self.run(batch, Some(&mut cache))?;
        self.cache = Some(cache);
        Ok(logits)
    }

    /// Logits without touching the backward cache.
    pub fn infer(&self, batch: &Matrix) -> Result<Matrix> {
        self.run(batch, None)
    }

    fn run(&self, batch: &Matrix, mut cache: Option<&mut ForwardCache>) -> Result<Matrix> {
        if batch.cols() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                left: batch.shape(),
                right: self.layers[0].weights.shape(),
                context: "batch.cols must equal the first layer's in_dim",
            });
        }
        let last = self.layers.len() - 1;
        let mut x = batch.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            let z = layer.apply(&x)?;
            if let Some(c) = cache.as_deref_mut() {
                c.inputs.push(x);
            }
            if l == last {
                return Ok(z);
            }
            x = z.map(|v| v.max(0.0))?;
            if let Some(c) = cache.as_deref_mut() {
                c.pre_activations.push(z);
            }
        }
        unreachable!("loop returns on the last layer")
    }

    /// Gradients of the batch-mean loss given per-sample logit gradients.
    ///
    /// Consumes the cache from the preceding [`Self::forward`]; a second call
    /// without a new forward pass is an error.
    pub fn backward(&mut self, grad_logits: &Matrix) -> Result<ParamGrads> {
        let cache = self.cache.take().ok_or(Error::BackwardBeforeForward)?;
        let batch = cache.inputs[0].rows();
        let expected = (batch, self.num_classes());
        if grad_logits.shape() != expected {
            self.cache = Some(cache);
            return Err(Error::ShapeMismatch {
                left: grad_logits.shape(),
                right: expected,
                context: "grad_logits must match the logits of the last forward pass",
            });
        }
        let mut delta = grad_logits.scale(1.0 / batch as f64)?;
        let mut grads = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let input = &cache.inputs[l];
            grads.push(LayerGrads {
                weights: input.t_matmul(&delta)?,
                bias: delta.column_sums(),
            });
            if l > 0 {
                let upstream = delta.matmul_t(&self.layers[l].weights)?;
                let mask = &cache.pre_activations[l - 1];
                let masked: Vec<f64> = upstream
                    .data()
                    .iter()
                    .zip(mask.data())
                    .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
                    .collect();
                delta = Matrix::from_vec(upstream.rows(), upstream.cols(), masked)?;
            }
        }
        grads.reverse();
        Ok(ParamGrads { layers: grads })
    }

    /// Parameter tensors as `[W0, b0, W1, b1, …]`.
    pub fn params_mut(&mut self) -> Vec<ParamMut<'_>> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                [
                    ParamMut {
                        kind: ParamKind::Weight,
                        values: l.weights.data_mut(),
                    },
                    ParamMut {
                        kind: ParamKind::Bias,
                        values: l.bias.as_mut_slice(),
                    },
                ]
            })
            .collect()
    }

    pub fn param_shapes(&self) -> Vec<usize> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.data().len(), l.bias.len()])
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.param_shapes().iter().sum()
    }

    /// FNV-1a over the bit patterns of every parameter.
    pub fn checksum(&self) -> u64 {
        let mut h = crate::numeric::Fnv1a::new();
        for l in &self.layers {
            h.write_f64s(l.weights.data());
            h.write_f64s(&l.bias);
        }
        h.finish()
    }
}

/// He-initialized model: weights `~ N(0, sqrt(2 / in_dim))`, zero biases.
pub fn init_model(layer_dims: &[usize], rng: &mut Rng) -> Result<MlpModel> {
    if layer_dims.len() < 2 {
        return Err(invalid(format!(
            "need at least input and output dims, got {layer_dims:?}"
        )));
    }
    if layer_dims.contains(&0) {
        return Err(invalid(format!("layer dims must be positive, got {layer_dims:?}")));
    }
    let layers = layer_dims
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let std = (2.0 / fan_in as f64).sqrt();
            let weights = (0..fan_in * fan_out)
                .map(|_| rng.normal(0.0, std))
                .collect::<Result<Vec<_>>>()?;
            AffineLayer::new(Matrix::from_vec(fan_in, fan_out, weights)?, vec![0.0; fan_out])
        })
        .collect::<Result<Vec<_>>>()?;
    MlpModel::from_layers(layers)
}
