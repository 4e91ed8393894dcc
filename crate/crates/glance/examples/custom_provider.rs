//! Plug in your own embedding backend: implement `EmbeddingProvider`, wrap
//! it in the content-addressed file cache, and watch the warm path skip the
//! backend entirely. Swapping providers changes values only, never shapes.
//!
//! Run with: cargo run --release --example custom_provider

use glance::graph::{build_graph, NodeRecord, Split};
use glance::llm::{
    embed_node, serialize_prompts, CachedProvider, EmbeddingCache, EmbeddingProvider,
};
use std::sync::atomic::{AtomicU64, Ordering};

/// A toy backend: coordinate i of the embedding counts bytes congruent to
/// i mod dim. Anything deterministic per prompt works.
struct ByteHistogramProvider {
    dim: usize,
    calls: AtomicU64,
}

impl EmbeddingProvider for ByteHistogramProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, prompts: &[String]) -> glance::Result<Vec<Vec<f64>>> {
        self.calls
            .fetch_add(prompts.len() as u64, Ordering::Relaxed);
        Ok(prompts
            .iter()
            .map(|p| {
                let mut v = vec![0.0; self.dim];
                for &b in p.as_bytes() {
                    v[b as usize % self.dim] += 1.0;
                }
                v
            })
            .collect())
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

fn main() -> glance::Result<()> {
    // a small graph so the prompts have neighborhoods to serialize
    let nodes = (0..6)
        .map(|id| NodeRecord {
            id,
            text: format!("document {id} about topic {}", id % 2),
            label: id % 2,
            feature: vec![id as f64],
            split: Some(Split::Train),
        })
        .collect();
    let g = build_graph(nodes, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)], 2)?;
    let classes = vec!["alpha".to_string(), "beta".to_string()];

    let bundle = serialize_prompts(&g, 2, &classes, 99)?;
    println!("ego prompt for node 2:\n---\n{}\n---\n", bundle.ego);

    let dir = std::env::temp_dir().join("glance-example-cache");
    std::fs::create_dir_all(&dir)?;
    let cache_path = dir.join("cache.jsonl");
    let _ = std::fs::remove_file(&cache_path);

    let backend = ByteHistogramProvider {
        dim: 16,
        calls: AtomicU64::new(0),
    };
    let provider = CachedProvider::new(Box::new(backend), EmbeddingCache::open(&cache_path)?);

    let embedding = embed_node(&provider, &bundle, false)?;
    println!(
        "embedded node 2: total dim {} = 3 x {}, backend calls {}",
        embedding.total_dim(),
        provider.dim(),
        provider.calls()
    );
    for segment in 0..3 {
        let norm: f64 = embedding
            .segment(segment)
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        println!("  segment {segment} l2 norm {norm:.6}");
    }

    // same prompts again: served from the cache file, zero backend calls
    let calls_before = provider.calls();
    let again = embed_node(&provider, &bundle, false)?;
    assert_eq!(again, embedding);
    println!(
        "warm repeat: backend calls unchanged at {} (cache file {})",
        provider.calls() - calls_before,
        cache_path.display()
    );
    Ok(())
}
