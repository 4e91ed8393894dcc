//! Frozen-expert precomputation and the per-run embedding memo.
//!
//! Everything derived from the frozen experts (structural embeddings, head
//! probabilities and losses, uncertainty, soft homophily, standardization
//! stats, routing features) is computed once before the first epoch; it
//! cannot change while the experts are frozen.

use crate::error::Result;
use crate::gnn::{
    gcn_forward, head_predict, mc_dropout_uncertainty, normalize_adjacency, GcnModel,
    NormalizedAdjacency, UncertaintyStat,
};
use crate::graph::{Split, TextAttributedGraph};
use crate::homophily::{soft_homophily, HomophilyEstimator};
use crate::llm::{embed_node, serialize_prompts, EmbeddingProvider, LlmEmbedding};
use crate::nn::DenseMatrix;
use crate::router::{assemble_features, FeatureInputs, FeatureLayout, ScalarStats};
use crate::trainer::rewards::probability_loss;
use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

/// Per-node quantities fixed by the frozen experts.
pub struct FrozenContext {
    pub adj: NormalizedAdjacency,
    pub x: DenseMatrix,
    /// Deterministic structural embeddings, n x hidden.
    pub z_g: DenseMatrix,
    /// Frozen-head class probabilities, n x classes.
    pub p_h: DenseMatrix,
    /// Cross-entropy of the frozen head per node.
    pub gnn_losses: Vec<f64>,
    pub uncertainty: Vec<f64>,
    pub soft_h: Vec<f64>,
    pub features: DenseMatrix,
    pub layout: FeatureLayout,
    pub stats: ScalarStats,
    /// Wall clock spent in structural-expert forward passes.
    pub gnn_time: Duration,
}

pub struct PrecomputeSettings {
    pub mc_passes: usize,
    pub mc_rate: f64,
    pub uncertainty_seed: u64,
    pub uncertainty_stat: UncertaintyStat,
    pub ablate: HashSet<String>,
}

pub fn precompute(
    gcn: &GcnModel,
    q: &HomophilyEstimator,
    g: &TextAttributedGraph,
    settings: &PrecomputeSettings,
) -> Result<FrozenContext> {
    let started = Instant::now();
    let adj = normalize_adjacency(g);
    let x = g.feature_matrix();
    let forward = gcn_forward(gcn, &adj, &x, 0.0, None)?;
    let p_h = head_predict(gcn, &forward.z_g)?;
    let uncertainty = mc_dropout_uncertainty(
        gcn,
        &adj,
        &x,
        settings.mc_passes,
        settings.mc_rate,
        settings.uncertainty_seed,
        settings.uncertainty_stat,
    )?;
    let gnn_time = started.elapsed();

    let gnn_losses: Vec<f64> = (0..g.num_nodes())
        .map(|v| probability_loss(p_h.row(v), g.label(v)))
        .collect::<Result<_>>()?;
    let q_probs = q.predict_probs(g)?;
    let soft_h = soft_homophily(g, &q_probs);
    let degree: Vec<f64> = (0..g.num_nodes()).map(|v| g.degree(v) as f64).collect();
    let train_ids = g.split_ids(Split::Train);
    let stats = ScalarStats::fit(&uncertainty, &soft_h, &degree, &train_ids);
    let inputs = FeatureInputs {
        z_g: &forward.z_g,
        uncertainty: &uncertainty,
        soft_h: &soft_h,
        x: &x,
        degree: &degree,
    };
    let (features, layout) = assemble_features(&inputs, &stats, &settings.ablate)?;
    Ok(FrozenContext {
        adj,
        x,
        z_g: forward.z_g,
        p_h,
        gnn_losses,
        uncertainty,
        soft_h,
        features,
        layout,
        stats,
        gnn_time,
    })
}

/// Per-run memo of node embeddings. Prompts are a pure function of
/// (graph, node, class names, seed), so an embedding computed once holds
/// for the whole run; the file cache behind the provider handles
/// cross-process reuse.
pub struct EmbeddingMemo {
    prompt_seed: u64,
    zero_empty_hops: bool,
    class_names: Vec<String>,
    memo: HashMap<usize, LlmEmbedding>,
    pub provider_time: Duration,
}

impl EmbeddingMemo {
    pub fn new(prompt_seed: u64, zero_empty_hops: bool, class_names: Vec<String>) -> Self {
        Self {
            prompt_seed,
            zero_empty_hops,
            class_names,
            memo: HashMap::new(),
            provider_time: Duration::ZERO,
        }
    }

    /// Embeddings for a set of nodes, memo-aware. Provider work happens
    /// behind a batch-level barrier: all missing nodes are embedded before
    /// anything downstream consumes the batch, so update order never
    /// depends on provider latency.
    pub fn embed_nodes(
        &mut self,
        g: &TextAttributedGraph,
        provider: &dyn EmbeddingProvider,
        nodes: &[usize],
    ) -> Result<Vec<LlmEmbedding>> {
        let missing: Vec<usize> = nodes
            .iter()
            .copied()
            .filter(|v| !self.memo.contains_key(v))
            .collect();
        if !missing.is_empty() {
            let started = Instant::now();
            for &v in &missing {
                let bundle = serialize_prompts(g, v, &self.class_names, self.prompt_seed)?;
                let embedding = match embed_node(provider, &bundle, self.zero_empty_hops) {
                    Ok(e) => e,
                    // one batch-level retry before giving up on the run
                    Err(first_err) => {
                        log::warn!("embedding retry for node {v}: {first_err}");
                        embed_node(provider, &bundle, self.zero_empty_hops)?
                    }
                };
                self.memo.insert(v, embedding);
            }
            self.provider_time += started.elapsed();
        }
        Ok(nodes.iter().map(|v| self.memo[v].clone()).collect())
    }
}
