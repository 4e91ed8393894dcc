//! Seeded k-hop neighborhood sampling with per-node caps, used for prompt
//! serialization. A pure function of (graph, node, k, cap, seed).

use crate::error::{GlanceError, Result};
use crate::graph::core::TextAttributedGraph;
use crate::rng::SeedSplitter;
use rand::seq::SliceRandom;
use std::collections::BTreeSet;

/// Sample up to `cap` hop-1 neighbors of `v` uniformly without replacement,
/// and for `k == 2` up to `cap` hop-2 neighbors per sampled hop-1 node,
/// excluding `v` and anything already selected. Returned pairs are
/// `(node, hop)` with each hop's nodes in ascending id order.
pub fn sample_khop(
    g: &TextAttributedGraph,
    v: usize,
    k: usize,
    per_node_cap: usize,
    seed: u64,
) -> Result<Vec<(usize, u8)>> {
    if !(1..=2).contains(&k) {
        return Err(GlanceError::Config(format!("k must be 1 or 2, got {k}")));
    }
    if per_node_cap == 0 {
        return Err(GlanceError::Config("per_node_cap must be >= 1".into()));
    }
    let mut rng = SeedSplitter::new(seed).stream_indexed("khop", v as u64);

    let hop1 = sample_without_replacement(g.neighbors(v), per_node_cap, &mut rng);
    let mut selected: BTreeSet<u32> = hop1.iter().copied().collect();
    selected.insert(v as u32);

    let mut out: Vec<(usize, u8)> = hop1.iter().map(|&u| (u as usize, 1)).collect();
    if k == 2 {
        let mut hop2: Vec<u32> = Vec::new();
        for &u in &hop1 {
            let candidates: Vec<u32> = g
                .neighbors(u as usize)
                .iter()
                .copied()
                .filter(|w| !selected.contains(w))
                .collect();
            let picked = sample_without_replacement(&candidates, per_node_cap, &mut rng);
            for w in picked {
                selected.insert(w);
                hop2.push(w);
            }
        }
        hop2.sort_unstable();
        out.extend(hop2.into_iter().map(|w| (w as usize, 2)));
    }
    Ok(out)
}

/// Uniform sample of min(cap, len) items, returned in ascending order.
fn sample_without_replacement(
    items: &[u32],
    cap: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<u32> {
    let mut picked: Vec<u32> = if items.len() <= cap {
        items.to_vec()
    } else {
        items.choose_multiple(rng, cap).copied().collect()
    };
    picked.sort_unstable();
    picked
}
