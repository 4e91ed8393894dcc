//! The fusion head: a small MLP mapping the concatenation of the frozen
//! structural embedding and the concatenated text embedding to refined
//! class probabilities for routed nodes.

use crate::error::{GlanceError, Result};
use crate::nn::checkpoint::{load_mlp, save_mlp};
use crate::nn::{
    clip_gradients, mlp_backward, mlp_forward, softmax_cross_entropy_batch, softmax_rows,
    DenseMatrix, MlpModel, OptimizerState,
};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

pub const REFINER_CHECKPOINT_KIND: &str = "refiner";
pub const DEFAULT_REFINER_HIDDEN: usize = 128;

#[derive(Debug, Clone)]
pub struct RefinerModel {
    pub mlp: MlpModel,
    pub gnn_dim: usize,
    pub llm_dim: usize,
}

impl RefinerModel {
    pub fn new(
        gnn_dim: usize,
        llm_dim: usize,
        hidden: usize,
        num_classes: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        Ok(Self {
            mlp: MlpModel::new(&[gnn_dim + llm_dim, hidden, num_classes], rng)?,
            gnn_dim,
            llm_dim,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.mlp.output_dim()
    }

    /// Stack `[z_g || z_l]` rows for a batch of nodes.
    pub fn fuse_inputs(&self, z_g: &[&[f64]], z_l: &[&[f64]]) -> Result<DenseMatrix> {
        if z_g.len() != z_l.len() {
            return Err(GlanceError::Dim("z_g / z_l batch length mismatch".into()));
        }
        let mut out = DenseMatrix::zeros(z_g.len(), self.gnn_dim + self.llm_dim);
        for (r, (g, l)) in z_g.iter().zip(z_l).enumerate() {
            if g.len() != self.gnn_dim || l.len() != self.llm_dim {
                return Err(GlanceError::Dim(format!(
                    "fusion expects {} + {} dims, got {} + {}",
                    self.gnn_dim,
                    self.llm_dim,
                    g.len(),
                    l.len()
                )));
            }
            let row = out.row_mut(r);
            row[..g.len()].copy_from_slice(g);
            row[g.len()..].copy_from_slice(l);
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_mlp(path, &self.mlp, REFINER_CHECKPOINT_KIND)
    }

    pub fn load(path: &Path, gnn_dim: usize, llm_dim: usize) -> Result<Self> {
        let mlp = load_mlp(path, REFINER_CHECKPOINT_KIND)?;
        if mlp.input_dim() != gnn_dim + llm_dim {
            return Err(GlanceError::Dim(format!(
                "refiner checkpoint input {} vs expected {}",
                mlp.input_dim(),
                gnn_dim + llm_dim
            )));
        }
        Ok(Self {
            mlp,
            gnn_dim,
            llm_dim,
        })
    }
}

/// Refined class distributions for a batch of fused inputs. Deterministic:
/// no dropout at inference.
pub fn refine_predict(model: &RefinerModel, fused: &DenseMatrix) -> Result<DenseMatrix> {
    let (logits, _) = mlp_forward(&model.mlp, fused, 0.0, None)?;
    Ok(softmax_rows(&logits))
}

/// One AdamW step on the refiner from a batch of fused inputs and labels.
/// The inputs are constants: no gradient flows toward the frozen experts.
/// Returns the mean loss.
pub fn refiner_step(
    model: &mut RefinerModel,
    opt: &mut OptimizerState,
    fused: &DenseMatrix,
    labels: &[usize],
    clip_norm: f64,
) -> Result<f64> {
    if labels.is_empty() {
        return Err(GlanceError::Config("refiner step on empty batch".into()));
    }
    let (logits, cache) = mlp_forward(&model.mlp, fused, 0.0, None)?;
    let (loss, grad) = softmax_cross_entropy_batch(&logits, labels)?;
    if !loss.is_finite() {
        return Err(GlanceError::NonFinite("refiner loss".into()));
    }
    let mut grads = mlp_backward(&model.mlp, &cache, &grad)?;
    let mut flat: Vec<&mut [f64]> = Vec::new();
    for (gw, gb) in &mut grads.layers {
        flat.push(gw.values_mut());
        flat.push(gb.as_mut_slice());
    }
    clip_gradients(&mut flat, clip_norm);
    opt.step(&mut model.mlp.params_mut(), &grads.flat())?;
    Ok(loss)
}
