//! Graph data model: text-attributed graphs, structural metrics,
//! neighborhood sampling, dataset files, and synthetic generation.

pub mod core;
pub mod io;
pub mod metrics;
pub mod sampling;
pub mod synth;

pub use core::{assign_splits, build_graph, EdgeCleaning, NodeRecord, Split, TextAttributedGraph};
pub use io::{ingest_dataset, read_edges_csv, read_nodes_jsonl, write_dataset};
pub use metrics::{
    local_homophily, local_homophily_all, relative_degree, relative_degree_all, stratify_bins,
    structural_metrics, NodeStructuralMetrics, DEFAULT_BIN_EDGES, ISOLATED_SENTINEL,
};
pub use sampling::sample_khop;
pub use synth::{
    default_class_vocab, default_shared_vocab, synth_generate, MixtureComponent, SynthConfig,
    SynthOutput,
};
