//! Multi-layer perceptron with exact analytic gradients.
//!
//! The forward pass caches everything backward needs (layer inputs,
//! pre-activations, dropout masks) so gradients replay the exact forward
//! computation. The final layer is always identity; softmax lives in the
//! loss.

use crate::error::{GlanceError, Result};
use crate::nn::dropout::dropout_apply;
use crate::nn::matrix::DenseMatrix;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub fn apply(&self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Identity => v,
        }
    }

    /// Derivative as a function of the pre-activation value.
    pub fn derivative(&self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Layer {
    /// Weights, `input_dim x output_dim`.
    pub w: DenseMatrix,
    pub b: Vec<f64>,
    pub act: Activation,
}

#[derive(Debug, Clone)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
}

impl MlpModel {
    /// Build from a dim chain, relu on hidden layers and identity on the
    /// last. He initialization, biases zero.
    pub fn new(dims: &[usize], rng: &mut ChaCha8Rng) -> Result<Self> {
        if dims.len() < 2 {
            return Err(GlanceError::Config("mlp needs at least two dims".into()));
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for i in 0..dims.len() - 1 {
            let act = if i + 2 == dims.len() {
                Activation::Identity
            } else {
                Activation::Relu
            };
            layers.push(Layer::init(dims[i], dims[i + 1], act, rng)?);
        }
        Ok(Self { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().w.cols()
    }

    /// Parameter slices in a fixed order (w then b per layer), matching
    /// `MlpGradients::flat`.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for layer in &mut self.layers {
            let Layer { w, b, .. } = layer;
            out.push(w.values_mut());
            out.push(b.as_mut_slice());
        }
        out
    }

    pub fn param_shapes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for layer in &self.layers {
            out.push(layer.w.values().len());
            out.push(layer.b.len());
        }
        out
    }
}

impl Layer {
    pub fn init(
        input_dim: usize,
        output_dim: usize,
        act: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let std = match act {
            Activation::Relu => (2.0 / input_dim as f64).sqrt(),
            Activation::Identity => (1.0 / input_dim as f64).sqrt(),
        };
        let normal =
            Normal::new(0.0, std).map_err(|e| GlanceError::Config(format!("layer init: {e}")))?;
        let data: Vec<f64> = (0..input_dim * output_dim)
            .map(|_| normal.sample(rng))
            .collect();
        Ok(Self {
            w: DenseMatrix::from_vec(input_dim, output_dim, data)?,
            b: vec![0.0; output_dim],
            act,
        })
    }
}

/// Everything backward needs to replay the forward pass exactly.
#[derive(Debug, Clone)]
pub struct MlpCache {
    inputs: Vec<DenseMatrix>,
    preacts: Vec<DenseMatrix>,
    masks: Vec<Option<DenseMatrix>>,
}

/// Per-layer (grad_w, grad_b) in model order, plus the gradient w.r.t. the
/// input batch.
#[derive(Debug, Clone)]
pub struct MlpGradients {
    pub layers: Vec<(DenseMatrix, Vec<f64>)>,
    pub grad_input: DenseMatrix,
}

impl MlpGradients {
    /// Flat view matching `MlpModel::params_mut` order.
    pub fn flat(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for (gw, gb) in &self.layers {
            out.push(gw.values());
            out.push(gb.as_slice());
        }
        out
    }
}

/// Forward pass over a row batch. Dropout (on hidden activations) only runs
/// when an rng is supplied; without one the pass is deterministic.
pub fn mlp_forward(
    model: &MlpModel,
    x: &DenseMatrix,
    dropout_rate: f64,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<(DenseMatrix, MlpCache)> {
    if x.cols() != model.input_dim() {
        return Err(GlanceError::Dim(format!(
            "mlp input dim {} vs model {}",
            x.cols(),
            model.input_dim()
        )));
    }
    let n_layers = model.layers.len();
    let mut inputs = Vec::with_capacity(n_layers);
    let mut preacts = Vec::with_capacity(n_layers);
    let mut masks = Vec::with_capacity(n_layers);
    let mut current = x.clone();
    for (i, layer) in model.layers.iter().enumerate() {
        inputs.push(current.clone());
        let mut pre = current.matmul(&layer.w)?;
        pre.add_row_vector(&layer.b)?;
        preacts.push(pre.clone());
        let mut post = pre;
        post.map_in_place(|v| layer.act.apply(v));
        let hidden = i + 1 < n_layers;
        let mask = match (&mut rng, hidden && dropout_rate > 0.0) {
            (Some(rng), true) => {
                let (dropped, mask) = dropout_apply(&post, dropout_rate, rng)?;
                post = dropped;
                Some(mask)
            }
            _ => None,
        };
        masks.push(mask);
        current = post;
    }
    current.check_finite("mlp_forward output")?;
    Ok((
        current,
        MlpCache {
            inputs,
            preacts,
            masks,
        },
    ))
}

/// Exact backward pass from `grad_output` (d loss / d output rows).
pub fn mlp_backward(
    model: &MlpModel,
    cache: &MlpCache,
    grad_output: &DenseMatrix,
) -> Result<MlpGradients> {
    if cache.inputs.len() != model.layers.len() {
        return Err(GlanceError::Dim(
            "cache does not match model layer count".into(),
        ));
    }
    let mut grads: Vec<(DenseMatrix, Vec<f64>)> = Vec::with_capacity(model.layers.len());
    let mut grad = grad_output.clone();
    for (i, layer) in model.layers.iter().enumerate().rev() {
        if grad.cols() != layer.w.cols() || grad.rows() != cache.inputs[i].rows() {
            return Err(GlanceError::Dim(format!(
                "grad shape {}x{} does not match layer {}",
                grad.rows(),
                grad.cols(),
                i
            )));
        }
        if let Some(mask) = &cache.masks[i] {
            grad.mul_elementwise(mask)?;
        }
        // relu mask from the cached pre-activations
        let pre = &cache.preacts[i];
        for r in 0..grad.rows() {
            let pre_row = pre.row(r);
            for (g, &p) in grad.row_mut(r).iter_mut().zip(pre_row) {
                *g *= layer.act.derivative(p);
            }
        }
        let grad_w = cache.inputs[i].transpose_matmul(&grad)?;
        let grad_b = grad.column_sums();
        let grad_input = grad.matmul_transpose(&layer.w)?;
        grads.push((grad_w, grad_b));
        grad = grad_input;
    }
    grads.reverse();
    Ok(MlpGradients {
        layers: grads,
        grad_input: grad,
    })
}
