//! The embedding provider abstraction and the concatenated multi-hop node
//! embedding.
//!
//! A provider turns prompts into fixed-dimension vectors. Mock, cache-only,
//! cached-HTTP, and plain HTTP realizations are interchangeable: swapping
//! one for another changes values, never shapes or downstream types.

use crate::error::{GlanceError, Result};
use crate::llm::prompt::PromptBundle;

pub trait EmbeddingProvider: Send + Sync {
    /// Declared embedding dimension e; every returned vector has this
    /// length.
    fn dim(&self) -> usize;

    /// Embed a batch of prompts, one vector per prompt, in order.
    fn embed_batch(&self, prompts: &[String]) -> Result<Vec<Vec<f64>>>;

    /// Prompt embeddings computed by the backing model. Cache hits do not
    /// count.
    fn calls(&self) -> u64;

    /// Underlying HTTP requests, for providers that make any.
    fn http_requests(&self) -> u64 {
        0
    }
}

/// Concatenated per-node embedding `[ego || hop1 || hop2]`, each segment
/// l2-normalized (or all-zero when empty-hop zeroing is enabled).
#[derive(Debug, Clone, PartialEq)]
pub struct LlmEmbedding {
    pub z: Vec<f64>,
    pub segment_dim: usize,
}

impl LlmEmbedding {
    pub fn total_dim(&self) -> usize {
        self.z.len()
    }

    pub fn segment(&self, i: usize) -> &[f64] {
        &self.z[i * self.segment_dim..(i + 1) * self.segment_dim]
    }
}

pub fn l2_normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Embed one node's prompt bundle: one batched provider call over the three
/// prompts, each segment normalized, concatenated in (ego, hop1, hop2)
/// order. With `zero_empty_hops`, hop segments whose bullet list was empty
/// come back all-zero instead of carrying the ego-fallback embedding.
pub fn embed_node(
    provider: &dyn EmbeddingProvider,
    bundle: &PromptBundle,
    zero_empty_hops: bool,
) -> Result<LlmEmbedding> {
    let prompts: Vec<String> = bundle.prompts().iter().map(|s| s.to_string()).collect();
    let vectors = provider.embed_batch(&prompts)?;
    if vectors.len() != 3 {
        return Err(GlanceError::Provider(format!(
            "expected 3 embeddings, got {}",
            vectors.len()
        )));
    }
    let e = provider.dim();
    let mut z = Vec::with_capacity(3 * e);
    for (i, mut v) in vectors.into_iter().enumerate() {
        if v.len() != e {
            return Err(GlanceError::Config(format!(
                "provider returned dim {} where {} was declared",
                v.len(),
                e
            )));
        }
        let empty_hop =
            (i == 1 && bundle.hop1_neighbors == 0) || (i == 2 && bundle.hop2_neighbors == 0);
        if zero_empty_hops && empty_hop {
            v = vec![0.0; e];
        } else {
            l2_normalize(&mut v);
        }
        z.extend(v);
    }
    Ok(LlmEmbedding { z, segment_dim: e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::mock::MockProvider;

    fn bundle(hop1: usize, hop2: usize) -> PromptBundle {
        PromptBundle {
            ego: "ego prompt </END>".into(),
            hop1: "hop1 prompt </END>".into(),
            hop2: "hop2 prompt </END>".into(),
            hop1_neighbors: hop1,
            hop2_neighbors: hop2,
        }
    }

    #[test]
    fn segments_are_unit_norm_and_total_dim_is_3e() {
        let provider = MockProvider::new(16, 7, Vec::new()).unwrap();
        let emb = embed_node(&provider, &bundle(2, 3), false).unwrap();
        assert_eq!(emb.total_dim(), 48);
        for s in 0..3 {
            let norm: f64 = emb.segment(s).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn deterministic_across_calls() {
        let provider = MockProvider::new(16, 7, Vec::new()).unwrap();
        let a = embed_node(&provider, &bundle(1, 1), false).unwrap();
        let b = embed_node(&provider, &bundle(1, 1), false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_empty_hops_flag_zeroes_hop_segments() {
        let provider = MockProvider::new(16, 7, Vec::new()).unwrap();
        let emb = embed_node(&provider, &bundle(0, 0), true).unwrap();
        assert!(emb.segment(1).iter().all(|&v| v == 0.0));
        assert!(emb.segment(2).iter().all(|&v| v == 0.0));
        let norm0: f64 = emb.segment(0).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm0 - 1.0).abs() <= 1e-6);
    }
}
