//! Output manifests: artifact hashes, tool version, and per-component
//! timings for every run directory, plus the model-bundle manifest that
//! pins the frozen expert checkpoints.

use crate::error::{GlanceError, Result};
use crate::trainer::GlanceHyper;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

pub fn sha256_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn sha256_file(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(GlanceError::MissingArtifact(path.to_path_buf()));
    }
    Ok(sha256_bytes(&std::fs::read(path)?))
}

/// Manifest at the root of an output directory. BTreeMaps keep the
/// serialization order stable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub tool_version: String,
    /// Storage and accumulation precision of the numeric kernel.
    pub numerics: String,
    /// Relative artifact path -> sha256.
    pub artifacts: BTreeMap<String, String>,
    /// Command or component -> wall-clock milliseconds.
    pub timings_ms: BTreeMap<String, u128>,
}

impl Manifest {
    pub fn new() -> Self {
        Self {
            schema: 1,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            numerics: "f64 storage, f64 accumulation".to_string(),
            artifacts: BTreeMap::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn load_or_new(out: &Path) -> Self {
        let path = out.join("manifest.json");
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(m) = serde_json::from_str(&text) {
                return m;
            }
        }
        Self::new()
    }

    pub fn record_artifact(&mut self, out: &Path, rel: &str) -> Result<()> {
        let hash = sha256_file(&out.join(rel))?;
        self.artifacts.insert(rel.to_string(), hash);
        Ok(())
    }

    pub fn record_timing(&mut self, key: &str, ms: u128) {
        self.timings_ms.insert(key.to_string(), ms);
    }

    pub fn save(&self, out: &Path) -> Result<()> {
        std::fs::create_dir_all(out)?;
        std::fs::write(
            out.join("manifest.json"),
            serde_json::to_string_pretty(self)?,
        )?;
        Ok(())
    }
}

impl Default for Manifest {
    fn default() -> Self {
        Self::new()
    }
}

/// Manifest of a trained model bundle: the hyperparameters, the prompt
/// sampler seed, and hash pins of the frozen expert checkpoints consumed
/// during training. Downstream commands refuse to run when the pins no
/// longer match.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleManifest {
    pub schema: u32,
    pub hyper: GlanceHyper,
    pub prompt_seed: u64,
    pub class_names: Vec<String>,
    pub provider_dim: usize,
    /// Checkpoint filename -> sha256 at training time.
    pub expert_hashes: BTreeMap<String, String>,
    /// Trained artifact filename -> sha256.
    pub artifact_hashes: BTreeMap<String, String>,
}

impl BundleManifest {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(GlanceError::MissingArtifact(path.to_path_buf()));
        }
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Check that a pinned checkpoint still hashes to its recorded value.
    pub fn verify_expert(&self, name: &str, path: &Path) -> Result<()> {
        let expected = self.expert_hashes.get(name).ok_or_else(|| {
            GlanceError::Config(format!("bundle manifest has no hash pin for {name}"))
        })?;
        let actual = sha256_file(path)?;
        if &actual != expected {
            return Err(GlanceError::HashMismatch {
                name: name.to_string(),
                expected: expected.clone(),
                actual,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_matches_known_vector() {
        assert_eq!(
            sha256_bytes(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.json"), "{}").unwrap();
        let mut m = Manifest::new();
        m.record_artifact(dir.path(), "a.json").unwrap();
        m.record_timing("train-gnn", 123);
        m.save(dir.path()).unwrap();
        let back = Manifest::load_or_new(dir.path());
        assert_eq!(back.artifacts["a.json"], m.artifacts["a.json"]);
        assert_eq!(back.timings_ms["train-gnn"], 123);
    }

    #[test]
    fn expert_pin_detects_tamper() {
        let dir = tempfile::tempdir().unwrap();
        let ckpt = dir.path().join("gnn.json");
        std::fs::write(&ckpt, "original").unwrap();
        let mut pins = BTreeMap::new();
        pins.insert("gnn.json".to_string(), sha256_file(&ckpt).unwrap());
        let manifest = BundleManifest {
            schema: 1,
            hyper: GlanceHyper::default(),
            prompt_seed: 0,
            class_names: vec![],
            provider_dim: 32,
            expert_hashes: pins,
            artifact_hashes: BTreeMap::new(),
        };
        manifest.verify_expert("gnn.json", &ckpt).unwrap();
        std::fs::write(&ckpt, "tampered").unwrap();
        assert!(matches!(
            manifest.verify_expert("gnn.json", &ckpt),
            Err(GlanceError::HashMismatch { .. })
        ));
    }
}
