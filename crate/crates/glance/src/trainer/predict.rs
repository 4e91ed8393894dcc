//! Inference: per batch, the top-K_test nodes by routing score get refined
//! predictions; everyone else keeps the frozen structural expert's
//! prediction.

use crate::error::Result;
use crate::gnn::argmax;
use crate::graph::TextAttributedGraph;
use crate::llm::EmbeddingProvider;
use crate::refiner::{refine_predict, RefinerModel};
use crate::router::{select_topk, RouterPolicy};
use crate::trainer::context::{EmbeddingMemo, FrozenContext};
use serde::{Deserialize, Serialize};

pub struct PredictSettings {
    pub batch_size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct RoutingTrace {
    pub batches: Vec<BatchTrace>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchTrace {
    pub nodes: Vec<usize>,
    pub routed: Vec<usize>,
    /// Routing probability of each routed node.
    pub routed_scores: Vec<f64>,
}

impl RoutingTrace {
    pub fn routed_nodes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .batches
            .iter()
            .flat_map(|b| b.routed.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Predict labels for `nodes` (in the given order) under a per-batch budget
/// of `k_test` routed nodes. Returns predictions aligned with `nodes` plus
/// the routing trace.
#[allow(clippy::too_many_arguments)]
pub fn glance_predict(
    policy: &RouterPolicy,
    refiner: &RefinerModel,
    ctx: &FrozenContext,
    g: &TextAttributedGraph,
    provider: &dyn EmbeddingProvider,
    memo: &mut EmbeddingMemo,
    nodes: &[usize],
    k_test: usize,
    settings: &PredictSettings,
) -> Result<(Vec<usize>, RoutingTrace)> {
    let mut predictions = Vec::with_capacity(nodes.len());
    let mut trace = RoutingTrace::default();
    for batch in nodes.chunks(settings.batch_size.max(1)) {
        let scores: Vec<f64> = batch
            .iter()
            .map(|&v| policy.score(ctx.features.row(v)))
            .collect::<Result<_>>()?;
        let routed_local = select_topk(&scores, k_test);
        let routed: Vec<usize> = routed_local.iter().map(|&i| batch[i]).collect();

        let mut batch_preds: Vec<usize> = batch.iter().map(|&v| argmax(ctx.p_h.row(v))).collect();
        if !routed.is_empty() {
            let embeddings = memo.embed_nodes(g, provider, &routed)?;
            let z_g_rows: Vec<&[f64]> = routed.iter().map(|&v| ctx.z_g.row(v)).collect();
            let z_l_rows: Vec<&[f64]> = embeddings.iter().map(|e| e.z.as_slice()).collect();
            let fused = refiner.fuse_inputs(&z_g_rows, &z_l_rows)?;
            let p_c = refine_predict(refiner, &fused)?;
            for (row, &local) in routed_local.iter().enumerate() {
                batch_preds[local] = argmax(p_c.row(row));
            }
        }
        trace.batches.push(BatchTrace {
            nodes: batch.to_vec(),
            routed: routed.clone(),
            routed_scores: routed_local.iter().map(|&i| scores[i]).collect(),
        });
        predictions.extend(batch_preds);
    }
    Ok((predictions, trace))
}
