//! The joint training loop: deterministic top-k routing per batch,
//! counterfactual rewards, one AdamW step on the refiner from routed
//! prediction loss and one on the router from the advantage loss, experts
//! untouched throughout.

use crate::error::{GlanceError, Result};
use crate::graph::{Split, TextAttributedGraph};
use crate::llm::EmbeddingProvider;
use crate::nn::{clip_gradients, OptimizerState};
use crate::refiner::{refine_predict, refiner_step, RefinerModel};
use crate::rng::SeedSplitter;
use crate::router::{select_topk, BudgetSchedule, RouterPolicy};
use crate::trainer::context::{EmbeddingMemo, FrozenContext};
use crate::trainer::predict::{glance_predict, PredictSettings};
use crate::trainer::rewards::{
    probability_loss, reward, router_loss_grad, RewardRecord, RouterLossMode,
};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

/// Hyperparameters of the joint router/refiner training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GlanceHyper {
    /// Query cost subtracted from every routed advantage.
    pub beta: f64,
    pub lambda_router: f64,
    pub lambda_entropy: f64,
    pub schedule: BudgetSchedule,
    pub batch_size: usize,
    /// Training nodes are capped at this count by a seeded subsample.
    pub train_cap: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub router_learning_rate: f64,
    pub router_weight_decay: f64,
    pub refiner_learning_rate: f64,
    pub refiner_weight_decay: f64,
    pub refiner_hidden: usize,
    pub clip_norm: f64,
    pub router_loss_mode: RouterLossMode,
    /// Routing-feature names to drop, for the ablation runs.
    pub ablate: Vec<String>,
    pub zero_empty_hops: bool,
    pub mc_passes: usize,
    pub mc_rate: f64,
    pub uncertainty_stat: crate::gnn::UncertaintyStat,
    pub seed: u64,
}

impl Default for GlanceHyper {
    fn default() -> Self {
        Self {
            beta: 0.1,
            lambda_router: 1.0,
            lambda_entropy: 0.01,
            schedule: BudgetSchedule::default(),
            batch_size: 32,
            train_cap: 3000,
            patience: 2,
            max_epochs: 20,
            router_learning_rate: 1e-2,
            router_weight_decay: 1e-4,
            refiner_learning_rate: 1e-3,
            refiner_weight_decay: 1e-4,
            refiner_hidden: 128,
            clip_norm: 1.0,
            router_loss_mode: RouterLossMode::AsWritten,
            ablate: Vec::new(),
            zero_empty_hops: false,
            mc_passes: 5,
            mc_rate: 0.3,
            uncertainty_stat: crate::gnn::UncertaintyStat::Entropy,
            seed: 0,
        }
    }
}

impl GlanceHyper {
    pub fn validate(&self) -> Result<()> {
        if self.beta < 0.0 || self.lambda_router < 0.0 || self.lambda_entropy < 0.0 {
            return Err(GlanceError::Config(
                "beta and lambda weights must be non-negative".into(),
            ));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(GlanceError::Config(
                "batch size, epochs and patience must be positive".into(),
            ));
        }
        self.schedule.validate(self.batch_size)?;
        Ok(())
    }
}

/// Trainable state alongside the frozen context.
pub struct GlanceTrainState {
    pub policy: RouterPolicy,
    pub refiner: RefinerModel,
    pub policy_opt: OptimizerState,
    pub refiner_opt: OptimizerState,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub k_t: usize,
    pub batches: usize,
    pub routed_nodes: usize,
    pub mean_reward: f64,
    pub mean_pred_loss: f64,
    pub mean_route_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ComponentTimings {
    pub gnn_ms: u128,
    pub provider_ms: u128,
    pub router_refiner_ms: u128,
}

/// Per-run training report, including the runtime breakdown by component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub schema: u32,
    pub epochs: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub train_nodes_used: usize,
    pub provider_calls: u64,
    pub provider_http_requests: u64,
    pub timings: ComponentTimings,
}

pub struct BatchOutcome {
    pub records: Vec<RewardRecord>,
    pub routed: Vec<usize>,
    /// (1/|B|) sum of prediction losses (refiner for routed, frozen head
    /// otherwise).
    pub pred_loss_mean: f64,
    /// (1/|B|) sum of router losses.
    pub route_loss_mean: f64,
    /// pred_loss_mean + lambda_router * route_loss_mean.
    pub total_loss: f64,
}

/// One training batch: score, route top-K, embed routed nodes behind the
/// batch barrier, compute counterfactual losses and rewards, then update
/// refiner and router. Returns the reward records for the loss-decomposition
/// audit.
#[allow(clippy::too_many_arguments)]
pub fn batch_step(
    state: &mut GlanceTrainState,
    ctx: &FrozenContext,
    g: &TextAttributedGraph,
    provider: &dyn EmbeddingProvider,
    memo: &mut EmbeddingMemo,
    batch: &[usize],
    k_t: usize,
    hyper: &GlanceHyper,
) -> Result<BatchOutcome> {
    if batch.is_empty() {
        return Err(GlanceError::Config("empty training batch".into()));
    }
    let scores: Vec<f64> = batch
        .iter()
        .map(|&v| state.policy.score(ctx.features.row(v)))
        .collect::<Result<_>>()?;
    let routed_local = select_topk(&scores, k_t);
    let expected = k_t.min(batch.len());
    if routed_local.len() != expected {
        return Err(GlanceError::Config(format!(
            "routed {} nodes where the budget demands {expected}",
            routed_local.len()
        )));
    }
    let routed: Vec<usize> = routed_local.iter().map(|&i| batch[i]).collect();
    let routed_set: std::collections::HashSet<usize> = routed.iter().copied().collect();

    // batch barrier: all routed embeddings exist before any loss is formed
    let embeddings = memo.embed_nodes(g, provider, &routed)?;

    let update_started = Instant::now();
    let (p_c, fused) = if routed.is_empty() {
        (None, None)
    } else {
        let z_g_rows: Vec<&[f64]> = routed.iter().map(|&v| ctx.z_g.row(v)).collect();
        let z_l_rows: Vec<&[f64]> = embeddings.iter().map(|e| e.z.as_slice()).collect();
        let fused = state.refiner.fuse_inputs(&z_g_rows, &z_l_rows)?;
        let p_c = refine_predict(&state.refiner, &fused)?;
        (Some(p_c), Some(fused))
    };

    // counterfactual losses and rewards from the pre-update refiner
    let mut records = Vec::with_capacity(batch.len());
    let mut pred_loss_sum = 0.0;
    for (slot, &v) in batch.iter().enumerate() {
        let gnn_loss = ctx.gnn_losses[v];
        let (is_routed, llm_loss) = if routed_set.contains(&v) {
            let row = routed.iter().position(|&u| u == v).unwrap();
            let p_c = p_c.as_ref().unwrap();
            (true, Some(probability_loss(p_c.row(row), g.label(v))?))
        } else {
            (false, None)
        };
        let r = reward(is_routed, gnn_loss, llm_loss, hyper.beta)?;
        pred_loss_sum += llm_loss.unwrap_or(gnn_loss);
        records.push(RewardRecord {
            node: v,
            routed: is_routed,
            gnn_loss,
            llm_loss,
            reward: r,
            score: scores[slot],
        });
    }

    // refiner step from the mean routed prediction loss
    if let Some(fused) = fused {
        let labels: Vec<usize> = routed.iter().map(|&v| g.label(v)).collect();
        refiner_step(
            &mut state.refiner,
            &mut state.refiner_opt,
            &fused,
            &labels,
            hyper.clip_norm,
        )?;
    }

    // router step from the mean lambda-weighted advantage loss
    let mut grad_w = vec![0.0; state.policy.w.len()];
    let mut grad_b = 0.0;
    let mut route_loss_sum = 0.0;
    let batch_scale = 1.0 / batch.len() as f64;
    for record in &records {
        let out = router_loss_grad(
            &state.policy,
            ctx.features.row(record.node),
            record.reward,
            hyper.lambda_entropy,
            record.routed,
            hyper.router_loss_mode,
        )?;
        route_loss_sum += out.loss;
        let scale = hyper.lambda_router * batch_scale;
        for (acc, g) in grad_w.iter_mut().zip(&out.grad_w) {
            *acc += scale * g;
        }
        grad_b += scale * out.grad_bias;
    }
    let mut grad_b_slice = [grad_b];
    clip_gradients(
        &mut [grad_w.as_mut_slice(), grad_b_slice.as_mut_slice()],
        hyper.clip_norm,
    );
    state.policy_opt.step(
        &mut [
            state.policy.w.as_mut_slice(),
            std::slice::from_mut(&mut state.policy.bias),
        ],
        &[grad_w.as_slice(), grad_b_slice.as_slice()],
    )?;

    let pred_loss_mean = pred_loss_sum * batch_scale;
    let route_loss_mean = route_loss_sum * batch_scale;
    let outcome = BatchOutcome {
        records,
        routed,
        pred_loss_mean,
        route_loss_mean,
        total_loss: pred_loss_mean + hyper.lambda_router * route_loss_mean,
    };
    let _ = update_started; // timing folded into the epoch loop
    Ok(outcome)
}

/// Train router and refiner over the frozen experts. Returns the best
/// validation-accuracy state and the training report.
pub fn train_glance(
    g: &TextAttributedGraph,
    ctx: &FrozenContext,
    provider: &dyn EmbeddingProvider,
    memo: &mut EmbeddingMemo,
    hyper: &GlanceHyper,
) -> Result<(RouterPolicy, RefinerModel, TrainReport)> {
    hyper.validate()?;
    let splitter = SeedSplitter::new(hyper.seed);

    let mut train_ids = g.split_ids(Split::Train);
    if train_ids.is_empty() {
        return Err(GlanceError::Config("empty train split".into()));
    }
    if train_ids.len() > hyper.train_cap {
        train_ids.shuffle(&mut splitter.stream("glance-train-cap"));
        train_ids.truncate(hyper.train_cap);
        train_ids.sort_unstable();
    }
    let val_ids = g.split_ids(Split::Val);
    if val_ids.is_empty() {
        return Err(GlanceError::Config("empty val split".into()));
    }

    let mut state = GlanceTrainState {
        policy: RouterPolicy::zeros(ctx.layout.clone()),
        refiner: RefinerModel::new(
            ctx.z_g.cols(),
            provider.dim() * 3,
            hyper.refiner_hidden,
            g.num_classes(),
            &mut splitter.stream("glance-refiner-init"),
        )?,
        policy_opt: OptimizerState::new(
            hyper.router_learning_rate,
            hyper.router_weight_decay,
            &[ctx.layout.total_dim(), 1],
        ),
        refiner_opt: OptimizerState::new(0.0, 0.0, &[0]),
    };
    state.refiner_opt = OptimizerState::new(
        hyper.refiner_learning_rate,
        hyper.refiner_weight_decay,
        &state.refiner.mlp.param_shapes(),
    );

    let mut report = TrainReport {
        schema: 1,
        epochs: Vec::new(),
        best_epoch: 0,
        best_val_accuracy: f64::NEG_INFINITY,
        train_nodes_used: train_ids.len(),
        provider_calls: 0,
        provider_http_requests: 0,
        timings: ComponentTimings {
            gnn_ms: ctx.gnn_time.as_millis(),
            provider_ms: 0,
            router_refiner_ms: 0,
        },
    };

    let mut best: Option<(RouterPolicy, RefinerModel)> = None;
    let mut since_best = 0usize;
    let mut update_time = Duration::ZERO;
    for epoch in 1..=hyper.max_epochs {
        let k_t = hyper.schedule.schedule_k(epoch);
        let mut order = train_ids.clone();
        order.shuffle(&mut splitter.stream_indexed("glance-shuffle", epoch as u64));

        let mut routed_nodes = 0usize;
        let mut reward_sum = 0.0;
        let mut pred_sum = 0.0;
        let mut route_sum = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks(hyper.batch_size) {
            let update_started = Instant::now();
            let outcome = batch_step(&mut state, ctx, g, provider, memo, batch, k_t, hyper)?;
            update_time += update_started.elapsed();
            if !outcome.total_loss.is_finite() {
                return Err(GlanceError::Divergence { epoch });
            }
            routed_nodes += outcome.routed.len();
            reward_sum += outcome.records.iter().map(|r| r.reward).sum::<f64>();
            pred_sum += outcome.pred_loss_mean;
            route_sum += outcome.route_loss_mean;
            batches += 1;
        }

        // early-stopping signal: fused accuracy on the val split at the
        // deployment budget
        let (val_preds, _) = glance_predict(
            &state.policy,
            &state.refiner,
            ctx,
            g,
            provider,
            memo,
            &val_ids,
            hyper.schedule.k_test,
            &PredictSettings {
                batch_size: hyper.batch_size,
            },
        )?;
        let val_accuracy = val_ids
            .iter()
            .zip(&val_preds)
            .filter(|(&v, &p)| g.label(v) == p)
            .count() as f64
            / val_ids.len() as f64;

        report.epochs.push(EpochStats {
            epoch,
            k_t,
            batches,
            routed_nodes,
            mean_reward: reward_sum / (batches.max(1) * hyper.batch_size) as f64,
            mean_pred_loss: pred_sum / batches.max(1) as f64,
            mean_route_loss: route_sum / batches.max(1) as f64,
            val_accuracy,
        });

        if val_accuracy > report.best_val_accuracy {
            report.best_val_accuracy = val_accuracy;
            report.best_epoch = epoch;
            best = Some((state.policy.clone(), state.refiner.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= hyper.patience {
                break;
            }
        }
    }

    report.provider_calls = provider.calls();
    report.provider_http_requests = provider.http_requests();
    report.timings.provider_ms = memo.provider_time.as_millis();
    report.timings.router_refiner_ms = (update_time.saturating_sub(memo.provider_time)).as_millis();

    let (policy, refiner) = best.expect("at least one epoch ran");
    Ok((policy, refiner, report))
}
