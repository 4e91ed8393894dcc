//! Minimal dense numeric kernel shared by every learned component:
//! matrices, MLPs with exact analytic gradients, losses, dropout, AdamW,
//! and global-norm clipping. f64 storage throughout; everything is
//! deterministic given explicit RNG streams.

pub mod checkpoint;
pub mod dropout;
pub mod loss;
pub mod matrix;
pub mod mlp;
pub mod optim;

pub use checkpoint::{load_mlp, save_mlp, MlpCheckpoint};
pub use dropout::dropout_apply;
pub use loss::{
    normalized_entropy, softmax_cross_entropy, softmax_cross_entropy_batch, softmax_row,
    softmax_rows,
};
pub use matrix::DenseMatrix;
pub use mlp::{mlp_backward, mlp_forward, Activation, Layer, MlpCache, MlpGradients, MlpModel};
pub use optim::{clip_gradients, global_norm, OptimizerState};

use crate::error::{GlanceError, Result};
use serde::{Deserialize, Serialize};

/// Shared knobs for supervised training loops.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub dropout_rate: f64,
    pub clip_norm: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            weight_decay: 1e-4,
            max_epochs: 1000,
            patience: 30,
            dropout_rate: 0.3,
            clip_norm: 1.0,
            batch_size: 128,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0
            || self.weight_decay < 0.0
            || self.max_epochs == 0
            || self.patience == 0
            || self.clip_norm <= 0.0
            || self.batch_size == 0
        {
            return Err(GlanceError::Config(
                "train config fields must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(GlanceError::Config(format!(
                "dropout rate {} outside [0,1)",
                self.dropout_rate
            )));
        }
        if self.patience > self.max_epochs {
            return Err(GlanceError::Config(format!(
                "patience {} exceeds max epochs {}",
                self.patience, self.max_epochs
            )));
        }
        Ok(())
    }
}
