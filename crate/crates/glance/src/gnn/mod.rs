//! The frozen structural expert: GCN encoder, prediction head, supervised
//! training, and MC-dropout uncertainty.

pub mod adjacency;
pub mod model;
pub mod train;
pub mod uncertainty;

pub use adjacency::{normalize_adjacency, NormalizedAdjacency};
pub use model::{
    gcn_backward, gcn_forward, head_predict, load_gcn, save_gcn, GcnCheckpoint, GcnConfig,
    GcnForwardOutput, GcnGradients, GcnModel,
};
pub use train::{accuracy_on, argmax, gnn_train, GnnTrainLog};
pub use uncertainty::{mc_dropout_uncertainty, UncertaintyStat};
