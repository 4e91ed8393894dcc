//! Softmax cross-entropy, stabilized by max-subtraction. No loss floor is
//! applied: the trainer's reward arithmetic needs the unclipped value.

use crate::error::{GlanceError, Result};
use crate::nn::matrix::DenseMatrix;

/// Numerically stable softmax of one logit row.
pub fn softmax_row(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Row-wise softmax of a logits matrix.
pub fn softmax_rows(logits: &DenseMatrix) -> DenseMatrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let probs = softmax_row(logits.row(r));
        out.row_mut(r).copy_from_slice(&probs);
    }
    out
}

/// Loss and gradient for one row: `-log softmax(logits)[label]` and
/// `softmax(logits) - one_hot(label)`.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if label >= logits.len() {
        return Err(GlanceError::Dim(format!(
            "label {} out of range for {} classes",
            label,
            logits.len()
        )));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(GlanceError::NonFinite(
            "softmax_cross_entropy logits".into(),
        ));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // log-sum-exp with the max subtracted keeps both loss and grad exact.
    let sum: f64 = logits.iter().map(|&v| (v - max).exp()).sum();
    let log_sum = sum.ln();
    let loss = log_sum - (logits[label] - max);
    let mut grad: Vec<f64> = logits.iter().map(|&v| (v - max).exp() / sum).collect();
    grad[label] -= 1.0;
    Ok((loss, grad))
}

/// Mean loss and per-row gradient of the mean over a batch of rows.
pub fn softmax_cross_entropy_batch(
    logits: &DenseMatrix,
    labels: &[usize],
) -> Result<(f64, DenseMatrix)> {
    if logits.rows() != labels.len() {
        return Err(GlanceError::Dim(format!(
            "{} logit rows vs {} labels",
            logits.rows(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(GlanceError::Dim("empty batch".into()));
    }
    let scale = 1.0 / labels.len() as f64;
    let mut grad = DenseMatrix::zeros(logits.rows(), logits.cols());
    let mut total = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        let (loss, g) = softmax_cross_entropy(logits.row(r), label)?;
        total += loss;
        for (out, v) in grad.row_mut(r).iter_mut().zip(g) {
            *out = v * scale;
        }
    }
    Ok((total * scale, grad))
}

/// Shannon entropy of a distribution, normalized to [0,1] by ln(k).
pub fn normalized_entropy(probs: &[f64]) -> f64 {
    if probs.len() < 2 {
        return 0.0;
    }
    let mut h = 0.0;
    for &p in probs {
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    h / (probs.len() as f64).ln()
}
