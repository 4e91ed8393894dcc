//! The structural expert: a GCN encoder producing per-node embeddings and a
//! one-layer prediction head. Layer l computes relu(A_hat H W) with identity
//! activation at the final encoder layer; dropout runs on hidden activations
//! only when an rng is supplied.

use crate::error::{GlanceError, Result};
use crate::gnn::adjacency::NormalizedAdjacency;
use crate::nn::checkpoint::{LayerCheckpoint, CHECKPOINT_SCHEMA};
use crate::nn::dropout::dropout_apply;
use crate::nn::matrix::DenseMatrix;
use crate::nn::mlp::{
    mlp_backward, mlp_forward, Activation, Layer, MlpCache, MlpGradients, MlpModel,
};
use crate::nn::softmax_rows;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GcnConfig {
    /// Encoder depth, 2 or 3.
    pub layers: usize,
    pub hidden_dim: usize,
}

impl Default for GcnConfig {
    fn default() -> Self {
        Self {
            layers: 2,
            hidden_dim: 64,
        }
    }
}

impl GcnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.layers) {
            return Err(GlanceError::Config(format!(
                "encoder depth must be 2 or 3, got {}",
                self.layers
            )));
        }
        if self.hidden_dim == 0 {
            return Err(GlanceError::Config("hidden_dim must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GcnModel {
    /// Encoder weight matrices; dims chain feature_dim -> hidden -> hidden.
    pub encoder: Vec<DenseMatrix>,
    /// One-layer prediction head, hidden -> classes.
    pub head: MlpModel,
    pub hidden_dim: usize,
    pub num_classes: usize,
}

impl GcnModel {
    pub fn new(
        feature_dim: usize,
        num_classes: usize,
        cfg: &GcnConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut encoder = Vec::with_capacity(cfg.layers);
        let mut in_dim = feature_dim;
        for _ in 0..cfg.layers {
            let std = (2.0 / in_dim as f64).sqrt();
            let normal =
                Normal::new(0.0, std).map_err(|e| GlanceError::Config(format!("gcn init: {e}")))?;
            let data: Vec<f64> = (0..in_dim * cfg.hidden_dim)
                .map(|_| normal.sample(rng))
                .collect();
            encoder.push(DenseMatrix::from_vec(in_dim, cfg.hidden_dim, data)?);
            in_dim = cfg.hidden_dim;
        }
        let head = MlpModel {
            layers: vec![Layer::init(
                cfg.hidden_dim,
                num_classes,
                Activation::Identity,
                rng,
            )?],
        };
        Ok(Self {
            encoder,
            head,
            hidden_dim: cfg.hidden_dim,
            num_classes,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.encoder[0].rows()
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.encoder.len() {
            Activation::Identity
        } else {
            Activation::Relu
        }
    }

    /// Parameter slices: encoder weights then head (w, b), matching
    /// `GcnGradients::flat`.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = self.encoder.iter_mut().map(|w| w.values_mut()).collect();
        out.extend(self.head.params_mut());
        out
    }

    pub fn param_shapes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.encoder.iter().map(|w| w.values().len()).collect();
        out.extend(self.head.param_shapes());
        out
    }
}

#[derive(Debug, Clone)]
pub struct GcnCache {
    /// A_hat * h_(l-1) per layer.
    msgs: Vec<DenseMatrix>,
    preacts: Vec<DenseMatrix>,
    masks: Vec<Option<DenseMatrix>>,
    head_cache: MlpCache,
}

#[derive(Debug, Clone)]
pub struct GcnForwardOutput {
    /// Final encoder hidden state, n x hidden.
    pub z_g: DenseMatrix,
    /// Head logits, n x classes.
    pub logits: DenseMatrix,
    pub cache: GcnCache,
}

pub fn gcn_forward(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    dropout_rate: f64,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<GcnForwardOutput> {
    if x.cols() != model.feature_dim() {
        return Err(GlanceError::Dim(format!(
            "gcn forward on {} columns, model expects {}",
            x.cols(),
            model.feature_dim()
        )));
    }
    let layers = model.encoder.len();
    let mut msgs = Vec::with_capacity(layers);
    let mut preacts = Vec::with_capacity(layers);
    let mut masks = Vec::with_capacity(layers);
    let mut h = x.clone();
    for (l, w) in model.encoder.iter().enumerate() {
        let m = adj.spmm(&h)?;
        let s = m.matmul(w)?;
        msgs.push(m);
        preacts.push(s.clone());
        let act = model.activation(l);
        let mut a = s;
        a.map_in_place(|v| act.apply(v));
        let hidden = l + 1 < layers;
        let mask = match (&mut rng, hidden && dropout_rate > 0.0) {
            (Some(rng), true) => {
                let (dropped, mask) = dropout_apply(&a, dropout_rate, rng)?;
                a = dropped;
                Some(mask)
            }
            _ => None,
        };
        masks.push(mask);
        h = a;
    }
    h.check_finite("gcn hidden state")?;
    let (logits, head_cache) = mlp_forward(&model.head, &h, 0.0, None)?;
    Ok(GcnForwardOutput {
        z_g: h,
        logits,
        cache: GcnCache {
            msgs,
            preacts,
            masks,
            head_cache,
        },
    })
}

#[derive(Debug, Clone)]
pub struct GcnGradients {
    pub encoder: Vec<DenseMatrix>,
    pub head: MlpGradients,
}

impl GcnGradients {
    pub fn flat(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.encoder.iter().map(|g| g.values()).collect();
        out.extend(self.head.flat());
        out
    }

    pub fn flat_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = self.encoder.iter_mut().map(|g| g.values_mut()).collect();
        for (gw, gb) in &mut self.head.layers {
            out.push(gw.values_mut());
            out.push(gb.as_mut_slice());
        }
        out
    }
}

/// Exact backward pass from the loss gradient on the head logits. A_hat is
/// symmetric, so the message-passing transpose is another spmm.
pub fn gcn_backward(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    cache: &GcnCache,
    grad_logits: &DenseMatrix,
) -> Result<GcnGradients> {
    let head = mlp_backward(&model.head, &cache.head_cache, grad_logits)?;
    let mut grad_h = head.grad_input.clone();
    let mut encoder = vec![DenseMatrix::zeros(0, 0); model.encoder.len()];
    for (l, w) in model.encoder.iter().enumerate().rev() {
        if let Some(mask) = &cache.masks[l] {
            grad_h.mul_elementwise(mask)?;
        }
        let act = model.activation(l);
        let pre = &cache.preacts[l];
        for r in 0..grad_h.rows() {
            let pre_row = pre.row(r);
            for (g, &p) in grad_h.row_mut(r).iter_mut().zip(pre_row) {
                *g *= act.derivative(p);
            }
        }
        encoder[l] = cache.msgs[l].transpose_matmul(&grad_h)?;
        if l > 0 {
            let grad_m = grad_h.matmul_transpose(w)?;
            grad_h = adj.spmm(&grad_m)?;
        }
    }
    Ok(GcnGradients { encoder, head })
}

/// Class probabilities from the frozen head.
pub fn head_predict(model: &GcnModel, z_g: &DenseMatrix) -> Result<DenseMatrix> {
    let (logits, _) = mlp_forward(&model.head, z_g, 0.0, None)?;
    Ok(softmax_rows(&logits))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GcnCheckpoint {
    pub schema: u32,
    pub kind: String,
    pub num_layers: usize,
    pub hidden: usize,
    /// Encoder entries (bias all zero) followed by the head entry.
    pub layers: Vec<LayerCheckpoint>,
}

impl GcnCheckpoint {
    pub fn from_model(model: &GcnModel) -> Self {
        let mut layers: Vec<LayerCheckpoint> = model
            .encoder
            .iter()
            .enumerate()
            .map(|(l, w)| LayerCheckpoint {
                rows: w.rows(),
                cols: w.cols(),
                w: w.values().to_vec(),
                b: vec![0.0; w.cols()],
                act: if l + 1 == model.encoder.len() {
                    "id"
                } else {
                    "relu"
                }
                .to_string(),
            })
            .collect();
        layers.push(LayerCheckpoint::from_layer(&model.head.layers[0]));
        Self {
            schema: CHECKPOINT_SCHEMA,
            kind: "gcn".to_string(),
            num_layers: model.encoder.len(),
            hidden: model.hidden_dim,
            layers,
        }
    }

    pub fn to_model(&self) -> Result<GcnModel> {
        if self.kind != "gcn" {
            return Err(GlanceError::Config(format!(
                "checkpoint kind '{}' where 'gcn' expected",
                self.kind
            )));
        }
        if self.layers.len() != self.num_layers + 1 {
            return Err(GlanceError::Config(format!(
                "gcn checkpoint with {} entries for {} encoder layers",
                self.layers.len(),
                self.num_layers
            )));
        }
        let mut encoder = Vec::with_capacity(self.num_layers);
        for entry in &self.layers[..self.num_layers] {
            encoder.push(DenseMatrix::from_vec(
                entry.rows,
                entry.cols,
                entry.w.clone(),
            )?);
        }
        let head_layer = self.layers[self.num_layers].to_layer()?;
        let num_classes = head_layer.w.cols();
        Ok(GcnModel {
            encoder,
            head: MlpModel {
                layers: vec![head_layer],
            },
            hidden_dim: self.hidden,
            num_classes,
        })
    }
}

pub fn save_gcn(path: &Path, model: &GcnModel) -> Result<()> {
    std::fs::write(
        path,
        serde_json::to_string(&GcnCheckpoint::from_model(model))?,
    )?;
    Ok(())
}

pub fn load_gcn(path: &Path) -> Result<GcnModel> {
    if !path.exists() {
        return Err(GlanceError::MissingArtifact(path.to_path_buf()));
    }
    let ckpt: GcnCheckpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    ckpt.to_model()
}
