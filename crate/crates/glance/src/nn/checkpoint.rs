//! JSON checkpoint format shared by every learned component.
//!
//! Layout: `{"schema": 1, "kind": "...", "layers": [{"rows", "cols",
//! "w": [...], "b": [...], "act": "relu"|"id"}, ...]}` plus kind-specific
//! header fields. Serialization is field-ordered and therefore stable, so
//! checkpoint files can be hash-pinned.

use crate::error::{GlanceError, Result};
use crate::nn::matrix::DenseMatrix;
use crate::nn::mlp::{Activation, Layer, MlpModel};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CHECKPOINT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerCheckpoint {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub act: String,
}

impl LayerCheckpoint {
    pub fn from_layer(layer: &Layer) -> Self {
        Self {
            rows: layer.w.rows(),
            cols: layer.w.cols(),
            w: layer.w.values().to_vec(),
            b: layer.b.clone(),
            act: match layer.act {
                Activation::Relu => "relu".to_string(),
                Activation::Identity => "id".to_string(),
            },
        }
    }

    pub fn to_layer(&self) -> Result<Layer> {
        let act = match self.act.as_str() {
            "relu" => Activation::Relu,
            "id" => Activation::Identity,
            other => {
                return Err(GlanceError::Config(format!(
                    "unknown activation '{other}' in checkpoint"
                )))
            }
        };
        if self.b.len() != self.cols {
            return Err(GlanceError::Dim(format!(
                "checkpoint bias of {} for {} columns",
                self.b.len(),
                self.cols
            )));
        }
        Ok(Layer {
            w: DenseMatrix::from_vec(self.rows, self.cols, self.w.clone())?,
            b: self.b.clone(),
            act,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpCheckpoint {
    pub schema: u32,
    pub kind: String,
    pub layers: Vec<LayerCheckpoint>,
}

impl MlpCheckpoint {
    pub fn from_model(model: &MlpModel, kind: &str) -> Self {
        Self {
            schema: CHECKPOINT_SCHEMA,
            kind: kind.to_string(),
            layers: model
                .layers
                .iter()
                .map(LayerCheckpoint::from_layer)
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<MlpModel> {
        let layers: Result<Vec<Layer>> = self.layers.iter().map(|l| l.to_layer()).collect();
        let layers = layers?;
        if layers.is_empty() {
            return Err(GlanceError::Config("checkpoint has no layers".into()));
        }
        // consecutive layer dims must chain
        for pair in layers.windows(2) {
            if pair[0].w.cols() != pair[1].w.rows() {
                return Err(GlanceError::Dim(format!(
                    "checkpoint layer dims do not chain: {} -> {}",
                    pair[0].w.cols(),
                    pair[1].w.rows()
                )));
            }
        }
        Ok(MlpModel { layers })
    }
}

pub fn save_mlp(path: &Path, model: &MlpModel, kind: &str) -> Result<()> {
    let ckpt = MlpCheckpoint::from_model(model, kind);
    std::fs::write(path, serde_json::to_string(&ckpt)?)?;
    Ok(())
}

pub fn load_mlp(path: &Path, expected_kind: &str) -> Result<MlpModel> {
    if !path.exists() {
        return Err(GlanceError::MissingArtifact(path.to_path_buf()));
    }
    let ckpt: MlpCheckpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if ckpt.schema != CHECKPOINT_SCHEMA {
        return Err(GlanceError::Config(format!(
            "checkpoint schema {} unsupported",
            ckpt.schema
        )));
    }
    if ckpt.kind != expected_kind {
        return Err(GlanceError::Config(format!(
            "checkpoint kind '{}' where '{}' expected",
            ckpt.kind, expected_kind
        )));
    }
    ckpt.to_model()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from_seed;

    #[test]
    fn round_trip_is_exact() {
        let mut rng = stream_from_seed(3);
        let model = MlpModel::new(&[5, 8, 3], &mut rng).unwrap();
        let ckpt = MlpCheckpoint::from_model(&model, "q-estimator");
        let json = serde_json::to_string(&ckpt).unwrap();
        let back: MlpCheckpoint = serde_json::from_str(&json).unwrap();
        let restored = back.to_model().unwrap();
        for (a, b) in model.layers.iter().zip(&restored.layers) {
            assert_eq!(a.w.values(), b.w.values());
            assert_eq!(a.b, b.b);
            assert_eq!(a.act, b.act);
        }
    }

    #[test]
    fn serialization_is_byte_stable() {
        let mut rng = stream_from_seed(3);
        let model = MlpModel::new(&[4, 4], &mut rng).unwrap();
        let a = serde_json::to_string(&MlpCheckpoint::from_model(&model, "refiner")).unwrap();
        let b = serde_json::to_string(&MlpCheckpoint::from_model(&model, "refiner")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wrong_kind_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let mut rng = stream_from_seed(4);
        let model = MlpModel::new(&[2, 2], &mut rng).unwrap();
        save_mlp(&path, &model, "refiner").unwrap();
        assert!(load_mlp(&path, "q-estimator").is_err());
    }

    #[test]
    fn missing_file_is_missing_artifact() {
        let err = load_mlp(Path::new("/nonexistent/m.json"), "refiner").unwrap_err();
        assert!(matches!(err, GlanceError::MissingArtifact(_)));
    }
}
