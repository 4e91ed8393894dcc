//! GLANCE: adaptive GNN-LLM fusion for text-attributed graphs.
//!
//! A frozen GCN expert handles structure; a frozen, pluggable embedding
//! expert handles text; a learned linear router decides per node whether
//! the text expert is worth querying under a per-batch budget; and a small
//! refiner head fuses both embeddings for the routed nodes. The router is
//! trained with counterfactual advantage rewards since the expert queries
//! are non-differentiable.
//!
//! Entry points:
//! - [`graph`]: text-attributed graphs, homophily metrics, sampling,
//!   dataset files, synthetic generation
//! - [`nn`]: dense kernel: MLPs with exact gradients, AdamW, dropout
//! - [`gnn`]: the frozen structural expert and MC-dropout uncertainty
//! - [`homophily`]: the label-free homophily estimator
//! - [`llm`]: prompt serialization and embedding providers
//! - [`router`]: routing features, linear-sigmoid policy, budgets
//! - [`refiner`]: the fusion head
//! - [`trainer`]: advantage-reward training loop and inference
//! - [`eval`]: NCS, stratified accuracy, heuristic routers, reports
//! - [`pipeline`]: end-to-end commands shared by the CLI and examples
//!
//! ## Examples
//!
//! One runnable program per capability; start with these:
//!
//! ```bash
//! cargo run --release --example generate_graph      # controlled-homophily graphs
//! cargo run --release --example train_experts       # frozen experts + the accuracy gap
//! cargo run --release --example homophily_estimates # label-free hard/soft estimates
//! cargo run --release --example custom_provider     # your own embedding backend
//! cargo run --release --example glance_end_to_end   # the full pipeline
//! cargo run --release --example routing_heuristics  # static-heuristic NCS grid
//! cargo run --release --example k_sensitivity       # budget sweep at test time
//! cargo run --release --example feature_ablation    # drop each routing feature
//! cargo run --release --example beta_sweep          # query-cost penalty sweep
//! ```

pub mod error;
pub mod eval;
pub mod gnn;
pub mod graph;
pub mod homophily;
pub mod llm;
pub mod nn;
pub mod pipeline;
pub mod refiner;
pub mod rng;
pub mod router;
pub mod trainer;

pub use error::{GlanceError, Result};
