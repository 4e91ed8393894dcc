//! Text-attributed graph: nodes carrying text, a class label, and a feature
//! vector, plus an undirected simple edge set. Directed or duplicated input
//! edges are symmetrized and deduplicated at construction; self-loops are
//! dropped (self-loop handling is the GNN's concern). Immutable after
//! construction, safe for concurrent reads.

use crate::error::{GlanceError, Result};
use crate::nn::DenseMatrix;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// One node as supplied by ingestion or generation.
#[derive(Debug, Clone)]
pub struct NodeRecord {
    pub id: usize,
    pub text: String,
    pub label: usize,
    pub feature: Vec<f64>,
    pub split: Option<Split>,
}

/// Counts of edges removed while building the simple undirected edge set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCleaning {
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

#[derive(Debug, Clone)]
pub struct TextAttributedGraph {
    num_nodes: usize,
    num_classes: usize,
    /// Canonical unordered pairs, u < v, sorted.
    edges: Vec<(u32, u32)>,
    /// Symmetric closure of `edges`; each list sorted ascending.
    neighbor_index: Vec<Vec<u32>>,
    texts: Vec<String>,
    labels: Vec<usize>,
    features: Vec<Vec<f64>>,
    feature_dim: usize,
    split: Vec<Split>,
    cleaning: EdgeCleaning,
}

impl TextAttributedGraph {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbor_index[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbor_index[v].len()
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.neighbor_index[v].is_empty()
    }

    pub fn text(&self, v: usize) -> &str {
        &self.texts[v]
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature(&self, v: usize) -> &[f64] {
        &self.features[v]
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn split(&self, v: usize) -> Split {
        self.split[v]
    }

    pub fn split_ids(&self, which: Split) -> Vec<usize> {
        (0..self.num_nodes)
            .filter(|&v| self.split[v] == which)
            .collect()
    }

    pub fn cleaning(&self) -> EdgeCleaning {
        self.cleaning
    }

    /// Node features stacked into an `n x d` matrix.
    pub fn feature_matrix(&self) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.num_nodes * self.feature_dim);
        for f in &self.features {
            data.extend_from_slice(f);
        }
        DenseMatrix::from_vec(self.num_nodes, self.feature_dim, data)
            .expect("feature dims validated at construction")
    }
}

/// Build a graph from node records and raw edges.
///
/// Every record must carry a split tag; use [`assign_splits`] first when the
/// source data has none. Ids must form exactly `0..n`. Self-loops and
/// duplicate (unordered) edges are dropped with counts recorded on the
/// graph.
pub fn build_graph(
    mut nodes: Vec<NodeRecord>,
    edges: &[(usize, usize)],
    num_classes: usize,
) -> Result<TextAttributedGraph> {
    if nodes.is_empty() {
        return Err(GlanceError::Config("graph needs at least one node".into()));
    }
    if num_classes == 0 {
        return Err(GlanceError::Config("num_classes must be positive".into()));
    }
    let n = nodes.len();
    nodes.sort_by_key(|r| r.id);
    for (expected, record) in nodes.iter().enumerate() {
        if record.id != expected {
            return Err(GlanceError::Config(format!(
                "node ids must be exactly 0..{n}; missing or duplicate id near {expected}"
            )));
        }
    }
    let feature_dim = nodes[0].feature.len();
    let mut texts = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n);
    let mut split = Vec::with_capacity(n);
    for record in nodes {
        if record.feature.len() != feature_dim {
            return Err(GlanceError::Dim(format!(
                "node {} has feature dim {}, expected {}",
                record.id,
                record.feature.len(),
                feature_dim
            )));
        }
        if record.label >= num_classes {
            return Err(GlanceError::Config(format!(
                "node {} has label {} but num_classes is {}",
                record.id, record.label, num_classes
            )));
        }
        let s = record.split.ok_or_else(|| {
            GlanceError::Config(format!(
                "node {} has no split; assign splits before building",
                record.id
            ))
        })?;
        texts.push(record.text);
        labels.push(record.label);
        features.push(record.feature);
        split.push(s);
    }

    let mut cleaning = EdgeCleaning::default();
    let mut canonical: BTreeSet<(u32, u32)> = BTreeSet::new();
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(GlanceError::Config(format!(
                "edge ({a},{b}) references a node outside 0..{n}"
            )));
        }
        if a == b {
            cleaning.self_loops_dropped += 1;
            continue;
        }
        let pair = (a.min(b) as u32, a.max(b) as u32);
        if !canonical.insert(pair) {
            cleaning.duplicates_dropped += 1;
        }
    }

    let mut neighbor_index: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(u, v) in &canonical {
        neighbor_index[u as usize].push(v);
        neighbor_index[v as usize].push(u);
    }
    for list in &mut neighbor_index {
        list.sort_unstable();
    }

    Ok(TextAttributedGraph {
        num_nodes: n,
        num_classes,
        edges: canonical.into_iter().collect(),
        neighbor_index,
        texts,
        labels,
        features,
        feature_dim,
        split,
        cleaning,
    })
}

/// Assign a seeded 50/25/25 train/val/test split to every record that lacks
/// one. Records that already carry a split keep it.
pub fn assign_splits(records: &mut [NodeRecord], rng: &mut ChaCha8Rng) {
    let missing: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.split.is_none())
        .map(|(i, _)| i)
        .collect();
    if missing.is_empty() {
        return;
    }
    let mut order = missing.clone();
    order.shuffle(rng);
    let n = order.len();
    let train_end = n / 2;
    let val_end = train_end + (n - train_end) / 2;
    for (rank, &idx) in order.iter().enumerate() {
        records[idx].split = Some(if rank < train_end {
            Split::Train
        } else if rank < val_end {
            Split::Val
        } else {
            Split::Test
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from_seed;

    fn record(id: usize, label: usize) -> NodeRecord {
        NodeRecord {
            id,
            text: format!("node {id}"),
            label,
            feature: vec![id as f64, label as f64],
            split: Some(Split::Train),
        }
    }

    #[test]
    fn path_graph_symmetry() {
        let nodes = vec![record(0, 0), record(1, 0), record(2, 1)];
        let g = build_graph(nodes, &[(0, 1), (1, 2)], 2).unwrap();
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(2), &[1]);
    }

    #[test]
    fn self_loop_dropped_and_counted() {
        let nodes = vec![record(0, 0), record(1, 1)];
        let g = build_graph(nodes, &[(0, 0), (0, 1)], 2).unwrap();
        assert_eq!(g.cleaning().self_loops_dropped, 1);
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn unordered_duplicate_collapses() {
        let nodes = vec![record(0, 0), record(1, 1)];
        let g = build_graph(nodes, &[(0, 1), (1, 0)], 2).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.cleaning().duplicates_dropped, 1);
    }

    #[test]
    fn label_out_of_range_rejected() {
        let nodes = vec![record(0, 2)];
        assert!(build_graph(nodes, &[], 2).is_err());
    }

    #[test]
    fn feature_dim_mismatch_rejected() {
        let mut bad = record(1, 0);
        bad.feature = vec![1.0];
        assert!(build_graph(vec![record(0, 0), bad], &[], 2).is_err());
    }

    #[test]
    fn split_assignment_is_deterministic_and_covers() {
        let mut a: Vec<NodeRecord> = (0..100)
            .map(|i| {
                let mut r = record(i, 0);
                r.split = None;
                r
            })
            .collect();
        let mut b = a.clone();
        assign_splits(&mut a, &mut stream_from_seed(5));
        assign_splits(&mut b, &mut stream_from_seed(5));
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.split, y.split);
        }
        let train = a.iter().filter(|r| r.split == Some(Split::Train)).count();
        let val = a.iter().filter(|r| r.split == Some(Split::Val)).count();
        let test = a.iter().filter(|r| r.split == Some(Split::Test)).count();
        assert_eq!((train, val, test), (50, 25, 25));
    }
}
