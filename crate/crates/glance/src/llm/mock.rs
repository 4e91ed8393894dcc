//! Deterministic mock embedding provider, the desk-scale stand-in for a
//! frozen LLM embedder.
//!
//! The first `num_classes` coordinates are a normalized histogram of
//! class-vocabulary tokens found in the text (so texts built from class
//! pools carry a recoverable class signal); the remaining coordinates are
//! seeded hash noise of the full text. Pure and process-independent: the
//! same text always maps to the same vector.

use crate::error::{GlanceError, Result};
use crate::llm::provider::EmbeddingProvider;
use sha2::{Digest, Sha256};
use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};

/// Amplitude of the hash-noise coordinates; kept below the class-signal
/// scale so normalization does not drown the histogram.
const NOISE_AMPLITUDE: f64 = 0.2;

pub fn mock_embed(text: &str, e: usize, seed: u64, class_tokens: &[HashSet<String>]) -> Vec<f64> {
    let num_classes = class_tokens.len();
    let mut v = vec![0.0; e];
    if num_classes > 0 {
        let mut counts = vec![0usize; num_classes];
        for word in text.split_whitespace() {
            for (c, pool) in class_tokens.iter().enumerate() {
                if pool.contains(word) {
                    counts[c] += 1;
                }
            }
        }
        let total: usize = counts.iter().sum();
        if total > 0 {
            for (c, &count) in counts.iter().enumerate() {
                v[c] = count as f64 / total as f64;
            }
        }
    }
    for (j, slot) in v.iter_mut().enumerate().skip(num_classes) {
        *slot = hash_unit(text, seed, j as u64) * NOISE_AMPLITUDE;
    }
    v
}

/// Deterministic value in [-1, 1] from (text, seed, coordinate).
fn hash_unit(text: &str, seed: u64, coord: u64) -> f64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(coord.to_le_bytes());
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    let raw = u64::from_le_bytes(bytes);
    (raw as f64 / u64::MAX as f64) * 2.0 - 1.0
}

pub struct MockProvider {
    dim: usize,
    seed: u64,
    class_tokens: Vec<HashSet<String>>,
    calls: AtomicU64,
}

impl MockProvider {
    /// `class_vocab` may be empty (pure hash noise); when given, the
    /// dimension must leave at least 8 noise coordinates after the class
    /// histogram.
    pub fn new(dim: usize, seed: u64, class_vocab: Vec<Vec<String>>) -> Result<Self> {
        if dim < class_vocab.len() + 8 {
            return Err(GlanceError::Config(format!(
                "mock dim {} too small for {} classes (+8 noise coords)",
                dim,
                class_vocab.len()
            )));
        }
        Ok(Self {
            dim,
            seed,
            class_tokens: class_vocab
                .into_iter()
                .map(|pool| pool.into_iter().collect())
                .collect(),
            calls: AtomicU64::new(0),
        })
    }
}

impl EmbeddingProvider for MockProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, prompts: &[String]) -> Result<Vec<Vec<f64>>> {
        self.calls
            .fetch_add(prompts.len() as u64, Ordering::Relaxed);
        Ok(prompts
            .iter()
            .map(|p| mock_embed(p, self.dim, self.seed, &self.class_tokens))
            .collect())
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pools() -> Vec<HashSet<String>> {
        vec![
            ["topic0term0", "topic0term1"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            ["topic1term0", "topic1term1"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            ["topic2term0", "topic2term1"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        ]
    }

    #[test]
    fn pure_class2_text_yields_one_hot_histogram() {
        let v = mock_embed("topic2term0 topic2term1 topic2term0", 16, 1, &pools());
        assert_eq!(&v[..3], &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn same_text_same_vector() {
        let a = mock_embed("topic0term0 filler3", 16, 9, &pools());
        let b = mock_embed("topic0term0 filler3", 16, 9, &pools());
        assert_eq!(a, b);
    }

    #[test]
    fn noise_token_change_leaves_class_coords_fixed() {
        // direct recomputation oracle on both halves of the vector
        let a = mock_embed("topic1term0 filler1", 16, 3, &pools());
        let b = mock_embed("topic1term0 filler2", 16, 3, &pools());
        assert_eq!(&a[..3], &b[..3], "class histogram ignores filler tokens");
        assert_ne!(&a[3..], &b[3..], "hash noise sees the full text");
    }

    #[test]
    fn no_class_tokens_gives_zero_histogram() {
        let v = mock_embed("filler0 filler1", 16, 3, &pools());
        assert_eq!(&v[..3], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn dim_precondition_enforced() {
        let vocab: Vec<Vec<String>> = (0..4).map(|c| vec![format!("t{c}")]).collect();
        assert!(MockProvider::new(11, 0, vocab.clone()).is_err());
        assert!(MockProvider::new(12, 0, vocab).is_ok());
    }

    #[test]
    fn provider_counts_prompt_calls() {
        let p = MockProvider::new(16, 0, Vec::new()).unwrap();
        p.embed_batch(&["a".into(), "b".into(), "c".into()])
            .unwrap();
        assert_eq!(p.calls(), 3);
    }
}
