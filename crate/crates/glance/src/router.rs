//! Routing features, the linear-sigmoid policy, per-batch top-k selection,
//! and the decaying query-budget schedule.
//!
//! Feature vector per node: `[z_g || uncertainty || soft homophily || x ||
//! degree]`. Embedding segments pass through unscaled (they are unit-norm
//! scale already); the scalar segments are z-scored with train-split
//! statistics so degree cannot dominate the linear policy. Any segment can
//! be ablated by name, shrinking the layout consistently.

use crate::error::{GlanceError, Result};
use crate::nn::DenseMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::Path;

pub const FEATURE_ZG: &str = "z_g";
pub const FEATURE_UNCERTAINTY: &str = "uncertainty";
pub const FEATURE_SOFT_H: &str = "soft_homophily";
pub const FEATURE_X: &str = "x";
pub const FEATURE_DEGREE: &str = "degree";

pub const ALL_FEATURES: [&str; 5] = [
    FEATURE_ZG,
    FEATURE_UNCERTAINTY,
    FEATURE_SOFT_H,
    FEATURE_X,
    FEATURE_DEGREE,
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSegment {
    pub name: String,
    pub dim: usize,
}

/// Ordered segment names and dims; offsets are implied by order and
/// round-trip through serialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct FeatureLayout {
    pub segments: Vec<FeatureSegment>,
}

impl FeatureLayout {
    pub fn total_dim(&self) -> usize {
        self.segments.iter().map(|s| s.dim).sum()
    }

    pub fn offset_of(&self, name: &str) -> Option<(usize, usize)> {
        let mut offset = 0;
        for seg in &self.segments {
            if seg.name == name {
                return Some((offset, seg.dim));
            }
            offset += seg.dim;
        }
        None
    }

    pub fn has(&self, name: &str) -> bool {
        self.segments.iter().any(|s| s.name == name)
    }
}

/// Train-split mean/std for each scalar routing signal; std floored at
/// 1e-6 so constant signals standardize to zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarStats {
    pub uncertainty: (f64, f64),
    pub soft_h: (f64, f64),
    pub degree: (f64, f64),
}

fn mean_std(values: &[f64], ids: &[usize]) -> (f64, f64) {
    if ids.is_empty() {
        return (0.0, 1.0);
    }
    let n = ids.len() as f64;
    let mean = ids.iter().map(|&i| values[i]).sum::<f64>() / n;
    let var = ids.iter().map(|&i| (values[i] - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt().max(1e-6))
}

impl ScalarStats {
    pub fn fit(uncertainty: &[f64], soft_h: &[f64], degree: &[f64], train_ids: &[usize]) -> Self {
        Self {
            uncertainty: mean_std(uncertainty, train_ids),
            soft_h: mean_std(soft_h, train_ids),
            degree: mean_std(degree, train_ids),
        }
    }
}

/// Per-node raw routing signals, full-graph aligned.
pub struct FeatureInputs<'a> {
    pub z_g: &'a DenseMatrix,
    pub uncertainty: &'a [f64],
    pub soft_h: &'a [f64],
    pub x: &'a DenseMatrix,
    pub degree: &'a [f64],
}

/// Standardize scalars and concatenate the non-ablated segments for every
/// node. Returns the feature matrix and its layout.
pub fn assemble_features(
    inputs: &FeatureInputs,
    stats: &ScalarStats,
    ablate: &HashSet<String>,
) -> Result<(DenseMatrix, FeatureLayout)> {
    for name in ablate {
        if !ALL_FEATURES.contains(&name.as_str()) {
            return Err(GlanceError::Config(format!(
                "unknown routing feature '{name}' (known: {})",
                ALL_FEATURES.join(", ")
            )));
        }
    }
    let n = inputs.z_g.rows();
    if inputs.x.rows() != n
        || inputs.uncertainty.len() != n
        || inputs.soft_h.len() != n
        || inputs.degree.len() != n
    {
        return Err(GlanceError::Dim("routing inputs not node-aligned".into()));
    }
    let mut segments = Vec::new();
    for name in ALL_FEATURES {
        if ablate.contains(name) {
            continue;
        }
        let dim = match name {
            FEATURE_ZG => inputs.z_g.cols(),
            FEATURE_X => inputs.x.cols(),
            _ => 1,
        };
        segments.push(FeatureSegment {
            name: name.to_string(),
            dim,
        });
    }
    let layout = FeatureLayout { segments };
    let total = layout.total_dim();
    let mut out = DenseMatrix::zeros(n, total);
    for v in 0..n {
        let row = out.row_mut(v);
        let mut offset = 0;
        for seg in &layout.segments {
            match seg.name.as_str() {
                FEATURE_ZG => {
                    row[offset..offset + seg.dim].copy_from_slice(inputs.z_g.row(v));
                }
                FEATURE_X => {
                    row[offset..offset + seg.dim].copy_from_slice(inputs.x.row(v));
                }
                FEATURE_UNCERTAINTY => {
                    let (m, s) = stats.uncertainty;
                    row[offset] = (inputs.uncertainty[v] - m) / s;
                }
                FEATURE_SOFT_H => {
                    let (m, s) = stats.soft_h;
                    row[offset] = (inputs.soft_h[v] - m) / s;
                }
                FEATURE_DEGREE => {
                    let (m, s) = stats.degree;
                    row[offset] = (inputs.degree[v] - m) / s;
                }
                _ => unreachable!(),
            }
            offset += seg.dim;
        }
    }
    Ok((out, layout))
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Linear-sigmoid routing policy over the assembled features.
#[derive(Debug, Clone)]
pub struct RouterPolicy {
    pub w: Vec<f64>,
    pub bias: f64,
    pub layout: FeatureLayout,
}

impl RouterPolicy {
    /// All-zero weights: every node starts at probability 0.5.
    pub fn zeros(layout: FeatureLayout) -> Self {
        Self {
            w: vec![0.0; layout.total_dim()],
            bias: 0.0,
            layout,
        }
    }

    pub fn logit(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.w.len() {
            return Err(GlanceError::Dim(format!(
                "feature dim {} vs policy dim {}",
                features.len(),
                self.w.len()
            )));
        }
        let mut acc = self.bias;
        for (w, f) in self.w.iter().zip(features) {
            acc += w * f;
        }
        Ok(acc)
    }

    /// Routing probability a_v = sigma(w^T f + b).
    pub fn score(&self, features: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.logit(features)?))
    }

    pub fn score_rows(&self, features: &DenseMatrix, rows: &[usize]) -> Result<Vec<f64>> {
        rows.iter().map(|&r| self.score(features.row(r))).collect()
    }
}

/// Indices of the `min(k, len)` highest scores, ties broken by ascending
/// index. Returned sorted ascending; a pure function of (scores, k).
pub fn select_topk(scores: &[f64], k: usize) -> Vec<usize> {
    let take = k.min(scores.len());
    if take == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut picked: Vec<usize> = order[..take].to_vec();
    picked.sort_unstable();
    picked
}

/// Exponential budget decay across epochs:
/// K_t = round(K_end + (K_start - K_end) r^(t-1)).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetSchedule {
    pub k_start: usize,
    pub k_end: usize,
    pub decay: f64,
    pub k_test: usize,
}

impl Default for BudgetSchedule {
    fn default() -> Self {
        // K_start = batch size 32, K_end = K_start/4, r = 0.5, 12 at test
        Self {
            k_start: 32,
            k_end: 8,
            decay: 0.5,
            k_test: 12,
        }
    }
}

impl BudgetSchedule {
    pub fn validate(&self, batch_size: usize) -> Result<()> {
        if self.k_end < 1 || self.k_end > self.k_start || self.k_start > batch_size {
            return Err(GlanceError::Config(format!(
                "budget schedule needs 1 <= k_end <= k_start <= batch size \
                 (k_start {}, k_end {}, batch {batch_size})",
                self.k_start, self.k_end
            )));
        }
        if !(0.0..1.0).contains(&self.decay) || self.decay == 0.0 {
            return Err(GlanceError::Config(format!(
                "decay must be in (0,1), got {}",
                self.decay
            )));
        }
        Ok(())
    }

    /// Budget at epoch t >= 1; monotone non-increasing toward k_end.
    pub fn schedule_k(&self, t: usize) -> usize {
        assert!(t >= 1, "epochs are 1-based");
        let base = self.k_end as f64;
        let span = (self.k_start - self.k_end) as f64;
        (base + span * self.decay.powi(t as i32 - 1)).round() as usize
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouterCheckpoint {
    pub schema: u32,
    pub layout: Vec<FeatureSegment>,
    pub w: Vec<f64>,
    pub b: f64,
}

pub fn save_router(path: &Path, policy: &RouterPolicy) -> Result<()> {
    let ckpt = RouterCheckpoint {
        schema: 1,
        layout: policy.layout.segments.clone(),
        w: policy.w.clone(),
        b: policy.bias,
    };
    std::fs::write(path, serde_json::to_string(&ckpt)?)?;
    Ok(())
}

pub fn load_router(path: &Path) -> Result<RouterPolicy> {
    if !path.exists() {
        return Err(GlanceError::MissingArtifact(path.to_path_buf()));
    }
    let ckpt: RouterCheckpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let layout = FeatureLayout {
        segments: ckpt.layout,
    };
    if ckpt.w.len() != layout.total_dim() {
        return Err(GlanceError::Dim(format!(
            "router weights {} vs layout {}",
            ckpt.w.len(),
            layout.total_dim()
        )));
    }
    if ckpt.w.iter().any(|v| !v.is_finite()) || !ckpt.b.is_finite() {
        return Err(GlanceError::NonFinite("router checkpoint".into()));
    }
    Ok(RouterPolicy {
        w: ckpt.w,
        bias: ckpt.b,
        layout,
    })
}
