//! Run configuration: one JSON file mirroring every hyperparameter in the
//! pipeline. Unknown keys are rejected, and every command writes its
//! resolved config next to its outputs.
//!
//! All randomness flows from the single top-level `seed`: the pipeline
//! derives per-component seeds (data, gnn, q, router, sampler, provider)
//! from it, overwriting whatever the sub-sections carry, and the resolved
//! config shows the derived values.

use crate::error::{GlanceError, Result};
use crate::gnn::GcnConfig;
use crate::graph::{ingest_dataset, synth_generate, SynthConfig, SynthOutput, TextAttributedGraph};
use crate::llm::ProviderConfig;
use crate::nn::TrainConfig;
use crate::rng::SeedSplitter;
use crate::trainer::GlanceHyper;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataConfig {
    Synthetic {
        synth: SynthConfig,
    },
    Files {
        nodes: PathBuf,
        edges: PathBuf,
        #[serde(default)]
        num_classes: Option<usize>,
        #[serde(default)]
        class_names: Option<Vec<String>>,
    },
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig::Synthetic {
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct GnnSection {
    pub model: GcnConfig,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QSection {
    pub train: TrainConfig,
}

impl Default for QSection {
    fn default() -> Self {
        Self {
            train: TrainConfig {
                dropout_rate: 0.1,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub bin_edges: Vec<f64>,
    /// Budgets for the heuristic NCS grid, as routed fractions.
    pub heuristic_budgets: Vec<f64>,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            bin_edges: crate::graph::DEFAULT_BIN_EDGES.to_vec(),
            heuristic_budgets: vec![0.10, 0.15, 0.20],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub data: DataConfig,
    pub gnn: GnnSection,
    pub q: QSection,
    pub provider: ProviderConfig,
    pub glance: GlanceHyper,
    pub eval: EvalSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(GlanceError::MissingArtifact(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| GlanceError::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Derive all component seeds from the root seed and fill defaults that
    /// depend on other sections (the mock provider's class vocabulary).
    pub fn resolve(&self) -> RunConfig {
        let mut cfg = self.clone();
        let splitter = SeedSplitter::new(cfg.seed);
        if let DataConfig::Synthetic { synth } = &mut cfg.data {
            synth.seed = splitter.derive_seed("data");
        }
        cfg.gnn.train.seed = splitter.derive_seed("gnn");
        cfg.q.train.seed = splitter.derive_seed("q");
        cfg.glance.seed = splitter.derive_seed("router");
        if let ProviderConfig::Mock {
            seed, class_vocab, ..
        } = &mut cfg.provider
        {
            *seed = splitter.derive_seed("provider");
            if class_vocab.is_empty() {
                if let DataConfig::Synthetic { synth } = &cfg.data {
                    *class_vocab = synth.resolved_class_vocab();
                }
            }
        }
        cfg
    }

    /// Seed for the prompt neighborhood sampler.
    pub fn sampler_seed(&self) -> u64 {
        SeedSplitter::new(self.seed).derive_seed("sampler")
    }

    /// Seed for MC-dropout uncertainty passes.
    pub fn uncertainty_seed(&self) -> u64 {
        SeedSplitter::new(self.seed).derive_seed("uncertainty")
    }

    pub fn class_names(&self, num_classes: usize) -> Vec<String> {
        match &self.data {
            DataConfig::Files {
                class_names: Some(names),
                ..
            } => names.clone(),
            _ => (0..num_classes).map(|c| format!("class_{c}")).collect(),
        }
    }

    /// Materialize the dataset: generate the synthetic graph or ingest the
    /// configured files. The synthetic path also returns the generation
    /// summary.
    pub fn load_graph(&self) -> Result<(TextAttributedGraph, Option<SynthOutput>)> {
        match &self.data {
            DataConfig::Synthetic { synth } => {
                let out = synth_generate(synth)?;
                Ok((out.graph.clone(), Some(out)))
            }
            DataConfig::Files {
                nodes,
                edges,
                num_classes,
                ..
            } => {
                let g = ingest_dataset(
                    nodes,
                    edges,
                    *num_classes,
                    SeedSplitter::new(self.seed).derive_seed("data"),
                )?;
                Ok((g, None))
            }
        }
    }
}
