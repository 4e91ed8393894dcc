//! Per-node structural metrics: local homophily, relative degree, and the
//! homophily binning used by every stratified report.
//!
//! Isolated nodes have no defined homophily or relative degree; both return
//! the sentinel 1.0 and stratified reports exclude them upstream.

use crate::error::{GlanceError, Result};
use crate::graph::core::TextAttributedGraph;

/// Sentinel for metrics that are undefined on isolated nodes.
pub const ISOLATED_SENTINEL: f64 = 1.0;

pub const DEFAULT_BIN_EDGES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStructuralMetrics {
    pub degree: usize,
    pub local_homophily: f64,
    pub relative_degree: f64,
}

/// Fraction of v's neighbors sharing v's label.
pub fn local_homophily(g: &TextAttributedGraph, v: usize) -> f64 {
    let neighbors = g.neighbors(v);
    if neighbors.is_empty() {
        return ISOLATED_SENTINEL;
    }
    let same = neighbors
        .iter()
        .filter(|&&u| g.label(u as usize) == g.label(v))
        .count();
    same as f64 / neighbors.len() as f64
}

/// Mean of sqrt((d_v+1)/(d_u+1)) over v's neighbors; 1.0 on regular graphs,
/// above 1 when v out-degrees its neighborhood.
pub fn relative_degree(g: &TextAttributedGraph, v: usize) -> f64 {
    let neighbors = g.neighbors(v);
    if neighbors.is_empty() {
        return ISOLATED_SENTINEL;
    }
    let dv = (g.degree(v) + 1) as f64;
    let sum: f64 = neighbors
        .iter()
        .map(|&u| (dv / (g.degree(u as usize) + 1) as f64).sqrt())
        .sum();
    sum / neighbors.len() as f64
}

pub fn structural_metrics(g: &TextAttributedGraph, v: usize) -> NodeStructuralMetrics {
    NodeStructuralMetrics {
        degree: g.degree(v),
        local_homophily: local_homophily(g, v),
        relative_degree: relative_degree(g, v),
    }
}

pub fn local_homophily_all(g: &TextAttributedGraph) -> Vec<f64> {
    (0..g.num_nodes()).map(|v| local_homophily(g, v)).collect()
}

pub fn relative_degree_all(g: &TextAttributedGraph) -> Vec<f64> {
    (0..g.num_nodes()).map(|v| relative_degree(g, v)).collect()
}

/// Map each value to its bin index. Bins are half-open `[a, b)` except the
/// final bin, which includes its upper edge, so 0.25 lands in bin 1 and 1.0
/// in the last bin.
pub fn stratify_bins(values: &[f64], edges: &[f64]) -> Result<Vec<usize>> {
    if edges.len() < 2 {
        return Err(GlanceError::Config("need at least two bin edges".into()));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GlanceError::Config(
            "bin edges must be strictly increasing".into(),
        ));
    }
    let lo = edges[0];
    let hi = *edges.last().unwrap();
    let last_bin = edges.len() - 2;
    values
        .iter()
        .map(|&v| {
            if !(lo..=hi).contains(&v) {
                return Err(GlanceError::Config(format!(
                    "value {v} outside binning range [{lo}, {hi}]"
                )));
            }
            // upper edge of the final bin is closed
            if v == hi {
                return Ok(last_bin);
            }
            Ok(edges[1..].iter().position(|&e| v < e).unwrap_or(last_bin))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::core::{build_graph, NodeRecord, Split};
    use rand::Rng;

    fn graph_from(labels: &[usize], edges: &[(usize, usize)]) -> TextAttributedGraph {
        let num_classes = labels.iter().max().unwrap() + 1;
        let nodes = labels
            .iter()
            .enumerate()
            .map(|(id, &label)| NodeRecord {
                id,
                text: String::new(),
                label,
                feature: vec![0.0],
                split: Some(Split::Train),
            })
            .collect();
        build_graph(nodes, edges, num_classes).unwrap()
    }

    #[test]
    fn path_center_half_homophilous() {
        // labels A - A - B, center sees one match of two
        let g = graph_from(&[0, 0, 1], &[(0, 1), (1, 2)]);
        assert_eq!(local_homophily(&g, 1), 0.5);
    }

    #[test]
    fn star_center_fully_homophilous() {
        let g = graph_from(&[0, 0, 0, 0, 0], &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(local_homophily(&g, 0), 1.0);
    }

    #[test]
    fn homophily_matches_brute_force_on_random_graphs() {
        let mut rng = crate::rng::stream_from_seed(17);
        for _ in 0..20 {
            let n = 50;
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen::<f64>() < 0.06 {
                        edges.push((u, v));
                    }
                }
            }
            let g = graph_from(&labels, &edges);
            // Independent oracle: walk the raw edge list per node.
            for v in 0..n {
                let mut same = 0usize;
                let mut total = 0usize;
                for &(a, b) in &edges {
                    let other = if a == v {
                        b
                    } else if b == v {
                        a
                    } else {
                        continue;
                    };
                    total += 1;
                    if labels[other] == labels[v] {
                        same += 1;
                    }
                }
                let expected = if total == 0 {
                    ISOLATED_SENTINEL
                } else {
                    same as f64 / total as f64
                };
                assert_eq!(local_homophily(&g, v), expected);
            }
        }
    }

    #[test]
    fn cycle_relative_degree_is_one() {
        let g = graph_from(&[0, 0, 0, 0], &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        for v in 0..4 {
            assert!((relative_degree(&g, v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    #[allow(clippy::approx_constant)] // frozen oracle values, not math constants
    fn star_relative_degrees() {
        let g = graph_from(&[0, 0, 0, 0], &[(0, 1), (0, 2), (0, 3)]);
        // center: deg 3, leaves deg 1 -> sqrt(4/2)
        assert!((relative_degree(&g, 0) - 2.0f64.sqrt()).abs() < 1e-9);
        assert!((relative_degree(&g, 0) - 1.41421).abs() < 1e-5);
        // leaf: deg 1 vs center deg 3 -> sqrt(2/4)
        assert!((relative_degree(&g, 1) - 0.5f64.sqrt()).abs() < 1e-9);
        assert!((relative_degree(&g, 1) - 0.70711).abs() < 1e-5);
    }

    #[test]
    fn structural_metrics_aggregates_the_three_signals() {
        let g = graph_from(&[0, 0, 1], &[(0, 1), (1, 2)]);
        let m = structural_metrics(&g, 1);
        assert_eq!(m.degree, 2);
        assert_eq!(m.local_homophily, 0.5);
        assert_eq!(m.relative_degree, relative_degree(&g, 1));
    }

    #[test]
    fn isolated_node_gets_sentinel() {
        let g = graph_from(&[0, 0], &[]);
        assert_eq!(local_homophily(&g, 0), ISOLATED_SENTINEL);
        assert_eq!(relative_degree(&g, 0), ISOLATED_SENTINEL);
    }

    #[test]
    fn bin_conventions() {
        let bins = stratify_bins(&[0.0, 0.25, 1.0, 0.74999, 0.75], &DEFAULT_BIN_EDGES).unwrap();
        assert_eq!(bins, vec![0, 1, 3, 2, 3]);
    }

    #[test]
    fn bins_partition_input() {
        let mut rng = crate::rng::stream_from_seed(23);
        let values: Vec<f64> = (0..500).map(|_| rng.gen::<f64>()).collect();
        let bins = stratify_bins(&values, &DEFAULT_BIN_EDGES).unwrap();
        assert_eq!(bins.len(), values.len());
        let mut counts = [0usize; 4];
        for &b in &bins {
            counts[b] += 1;
        }
        assert_eq!(counts.iter().sum::<usize>(), values.len());
    }

    #[test]
    fn out_of_range_value_rejected() {
        assert!(stratify_bins(&[1.5], &DEFAULT_BIN_EDGES).is_err());
        assert!(stratify_bins(&[-0.1], &DEFAULT_BIN_EDGES).is_err());
    }
}
