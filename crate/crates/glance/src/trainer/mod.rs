//! Joint training of the router and refiner over frozen experts, with
//! counterfactual advantage rewards, plus budgeted inference.

pub mod context;
pub mod predict;
pub mod rewards;
pub mod train;

pub use context::{precompute, EmbeddingMemo, FrozenContext, PrecomputeSettings};
pub use predict::{glance_predict, BatchTrace, PredictSettings, RoutingTrace};
pub use rewards::{
    counterfactual_losses, probability_loss, reward, router_loss_grad, RewardRecord,
    RouterLossGrad, RouterLossMode,
};
pub use train::{
    batch_step, train_glance, BatchOutcome, ComponentTimings, EpochStats, GlanceHyper,
    GlanceTrainState, TrainReport,
};
