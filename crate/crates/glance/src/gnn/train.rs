//! Supervised full-batch training for the structural expert. The returned
//! model is the best-validation-accuracy checkpoint and is treated as
//! frozen from then on.

use crate::error::{GlanceError, Result};
use crate::gnn::adjacency::{normalize_adjacency, NormalizedAdjacency};
use crate::gnn::model::{gcn_backward, gcn_forward, GcnConfig, GcnModel};
use crate::graph::{Split, TextAttributedGraph};
use crate::nn::{clip_gradients, softmax_cross_entropy, DenseMatrix, OptimizerState, TrainConfig};
use crate::rng::SeedSplitter;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GnnTrainLog {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub final_train_accuracy: f64,
}

/// Mean cross-entropy over the given rows, with the gradient of that mean
/// placed on those rows only.
fn masked_loss(
    logits: &DenseMatrix,
    labels: &[usize],
    rows: &[usize],
) -> Result<(f64, DenseMatrix)> {
    if rows.is_empty() {
        return Err(GlanceError::Config("empty node set for loss".into()));
    }
    let scale = 1.0 / rows.len() as f64;
    let mut grad = DenseMatrix::zeros(logits.rows(), logits.cols());
    let mut total = 0.0;
    for &r in rows {
        let (loss, g) = softmax_cross_entropy(logits.row(r), labels[r])?;
        total += loss;
        for (out, v) in grad.row_mut(r).iter_mut().zip(g) {
            *out = v * scale;
        }
    }
    Ok((total * scale, grad))
}

pub fn accuracy_on(logits: &DenseMatrix, labels: &[usize], rows: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let correct = rows
        .iter()
        .filter(|&&r| argmax(logits.row(r)) == labels[r])
        .count();
    correct as f64 / rows.len() as f64
}

pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

pub fn gnn_train(
    g: &TextAttributedGraph,
    gcn_cfg: &GcnConfig,
    train_cfg: &TrainConfig,
) -> Result<(GcnModel, NormalizedAdjacency, GnnTrainLog)> {
    train_cfg.validate()?;
    let train_ids = g.split_ids(Split::Train);
    let val_ids = g.split_ids(Split::Val);
    if train_ids.is_empty() || val_ids.is_empty() {
        return Err(GlanceError::Config(
            "gnn training needs non-empty train and val splits".into(),
        ));
    }
    let splitter = SeedSplitter::new(train_cfg.seed);
    let mut init_rng = splitter.stream("gnn-init");
    let mut model = GcnModel::new(g.feature_dim(), g.num_classes(), gcn_cfg, &mut init_rng)?;
    let adj = normalize_adjacency(g);
    let x = g.feature_matrix();
    let labels: Vec<usize> = (0..g.num_nodes()).map(|v| g.label(v)).collect();

    let mut opt = OptimizerState::new(
        train_cfg.learning_rate,
        train_cfg.weight_decay,
        &model.param_shapes(),
    );
    let mut best = model.clone();
    let mut best_val = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut epochs_run = 0;
    for epoch in 1..=train_cfg.max_epochs {
        epochs_run = epoch;
        let mut drop_rng = splitter.stream_indexed("gnn-dropout", epoch as u64);
        let out = gcn_forward(
            &model,
            &adj,
            &x,
            train_cfg.dropout_rate,
            Some(&mut drop_rng),
        )?;
        let (loss, grad_logits) = masked_loss(&out.logits, &labels, &train_ids)?;
        if !loss.is_finite() {
            return Err(GlanceError::Divergence { epoch });
        }
        let mut grads = gcn_backward(&model, &adj, &out.cache, &grad_logits)?;
        clip_gradients(&mut grads.flat_mut(), train_cfg.clip_norm);
        opt.step(&mut model.params_mut(), &grads.flat())?;

        // deterministic pass for the early-stopping signal
        let eval = gcn_forward(&model, &adj, &x, 0.0, None)?;
        let val_acc = accuracy_on(&eval.logits, &labels, &val_ids);
        if val_acc > best_val {
            best_val = val_acc;
            best = model.clone();
            best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= train_cfg.patience {
                break;
            }
        }
    }
    let eval = gcn_forward(&best, &adj, &x, 0.0, None)?;
    let final_train_accuracy = accuracy_on(&eval.logits, &labels, &train_ids);
    Ok((
        best,
        adj,
        GnnTrainLog {
            epochs_run,
            best_epoch,
            best_val_accuracy: best_val,
            final_train_accuracy,
        },
    ))
}
