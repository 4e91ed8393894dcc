//! Property tests for the structural invariants: neighbor symmetry, bin
//! partitioning, top-k selection, sampling purity, and clipping bounds.

use glance::graph::{
    build_graph, sample_khop, stratify_bins, NodeRecord, Split, DEFAULT_BIN_EDGES,
};
use glance::nn::{clip_gradients, global_norm};
use glance::router::select_topk;
use proptest::prelude::*;

fn arbitrary_graph() -> impl Strategy<Value = glance::graph::TextAttributedGraph> {
    (
        2usize..40,
        proptest::collection::vec((0usize..40, 0usize..40), 0..120),
    )
        .prop_map(|(n, raw_edges)| {
            let nodes = (0..n)
                .map(|id| NodeRecord {
                    id,
                    text: format!("t{id}"),
                    label: id % 3,
                    feature: vec![id as f64],
                    split: Some(Split::Train),
                })
                .collect();
            let edges: Vec<(usize, usize)> =
                raw_edges.into_iter().map(|(a, b)| (a % n, b % n)).collect();
            build_graph(nodes, &edges, 3).unwrap()
        })
}

proptest! {
    #[test]
    fn neighbor_index_is_symmetric(g in arbitrary_graph()) {
        for v in 0..g.num_nodes() {
            for &u in g.neighbors(v) {
                prop_assert!(g.neighbors(u as usize).contains(&(v as u32)));
            }
        }
    }

    #[test]
    fn edges_are_simple_and_canonical(g in arbitrary_graph()) {
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in g.edges() {
            prop_assert!(a < b, "no self-loops, canonical order");
            prop_assert!(seen.insert((a, b)), "no duplicates");
        }
    }

    #[test]
    fn bins_partition_every_value(values in proptest::collection::vec(0.0f64..=1.0, 1..200)) {
        let bins = stratify_bins(&values, &DEFAULT_BIN_EDGES).unwrap();
        prop_assert_eq!(bins.len(), values.len());
        let mut counts = [0usize; 4];
        for &b in &bins {
            prop_assert!(b < 4);
            counts[b] += 1;
        }
        prop_assert_eq!(counts.iter().sum::<usize>(), values.len());
        for (v, b) in values.iter().zip(&bins) {
            prop_assert!(*v >= DEFAULT_BIN_EDGES[*b]);
            if *b < 3 {
                prop_assert!(*v < DEFAULT_BIN_EDGES[*b + 1]);
            }
        }
    }

    #[test]
    fn khop_is_pure_and_capped(
        g in arbitrary_graph(),
        v_raw in 0usize..40,
        cap in 1usize..6,
        seed in 0u64..1000,
    ) {
        let v = v_raw % g.num_nodes();
        let a = sample_khop(&g, v, 2, cap, seed).unwrap();
        let b = sample_khop(&g, v, 2, cap, seed).unwrap();
        prop_assert_eq!(&a, &b, "function of (graph, v, k, cap, seed)");
        prop_assert!(a.iter().all(|&(u, _)| u != v), "never returns the root");
        let hop1 = a.iter().filter(|(_, h)| *h == 1).count();
        let hop2 = a.iter().filter(|(_, h)| *h == 2).count();
        prop_assert!(hop1 <= cap);
        prop_assert!(hop2 <= cap * hop1);
    }

    #[test]
    fn topk_size_and_monotone_invariance(
        scores in proptest::collection::vec(-10.0f64..10.0, 1..60),
        k in 0usize..70,
    ) {
        let picked = select_topk(&scores, k);
        prop_assert_eq!(picked.len(), k.min(scores.len()));
        let transformed: Vec<f64> = scores.iter().map(|&v| (0.5 * v).exp()).collect();
        prop_assert_eq!(picked, select_topk(&transformed, k));
    }

    #[test]
    fn clipped_norm_is_bounded(
        grads in proptest::collection::vec(-100.0f64..100.0, 1..50),
        max_norm in 0.1f64..5.0,
    ) {
        let mut g = grads;
        clip_gradients(&mut [g.as_mut_slice()], max_norm);
        prop_assert!(global_norm(&[g.as_slice()]) <= max_norm + 1e-9);
    }
}
