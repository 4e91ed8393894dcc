//! Static routing heuristics: route the top-k% of evaluation nodes by a
//! single per-node signal. These are the baselines the learned router is
//! compared against.

use crate::error::{GlanceError, Result};
use crate::nn::DenseMatrix;
use crate::rng::SeedSplitter;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicKind {
    Random,
    Degree,
    CDensity,
    Uncertainty,
    SoftHomophily,
    RelativeDegree,
    /// Reads ground-truth labels; evaluation-only, gated behind an oracle
    /// flag at the command surface.
    TrueHomophily,
}

impl HeuristicKind {
    pub fn all() -> [HeuristicKind; 7] {
        [
            HeuristicKind::Random,
            HeuristicKind::CDensity,
            HeuristicKind::Degree,
            HeuristicKind::Uncertainty,
            HeuristicKind::SoftHomophily,
            HeuristicKind::RelativeDegree,
            HeuristicKind::TrueHomophily,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            HeuristicKind::Random => "random",
            HeuristicKind::Degree => "degree",
            HeuristicKind::CDensity => "c_density",
            HeuristicKind::Uncertainty => "uncertainty",
            HeuristicKind::SoftHomophily => "soft_h",
            HeuristicKind::RelativeDegree => "rel_degree",
            HeuristicKind::TrueHomophily => "true_h",
        }
    }

    pub fn needs_labels(&self) -> bool {
        matches!(self, HeuristicKind::TrueHomophily)
    }

    /// Which end of the metric gets routed: low degree, low density, high
    /// uncertainty, low homophily (estimated or true), low relative degree.
    pub fn direction(&self) -> Direction {
        match self {
            HeuristicKind::Uncertainty => Direction::RouteHighest,
            _ => Direction::RouteLowest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    RouteLowest,
    RouteHighest,
}

/// Per-node signals a heuristic can draw on; entries are full-graph
/// indexed. Optional signals error out when their heuristic is requested.
#[derive(Debug, Clone, Default)]
pub struct HeuristicSignals {
    pub degree: Vec<f64>,
    pub c_density: Option<Vec<f64>>,
    pub uncertainty: Option<Vec<f64>>,
    pub soft_homophily: Option<Vec<f64>>,
    pub relative_degree: Vec<f64>,
    pub true_homophily: Option<Vec<f64>>,
}

/// Route `floor(k_fraction * eval_ids.len())` nodes by sorted metric in the
/// heuristic's direction, ties broken by ascending node id. `Random` uses
/// the seed instead of a metric.
pub fn heuristic_route(
    kind: HeuristicKind,
    signals: &HeuristicSignals,
    eval_ids: &[usize],
    k_fraction: f64,
    seed: u64,
) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&k_fraction) || k_fraction == 0.0 {
        return Err(GlanceError::Config(format!(
            "routed fraction must be in (0,1], got {k_fraction}"
        )));
    }
    let take = ((k_fraction * eval_ids.len() as f64).floor() as usize).min(eval_ids.len());
    if kind == HeuristicKind::Random {
        let mut order = eval_ids.to_vec();
        order.shuffle(&mut SeedSplitter::new(seed).stream("heuristic-random"));
        let mut picked: Vec<usize> = order.into_iter().take(take).collect();
        picked.sort_unstable();
        return Ok(picked);
    }
    let metric: &[f64] = match kind {
        HeuristicKind::Degree => &signals.degree,
        HeuristicKind::RelativeDegree => &signals.relative_degree,
        HeuristicKind::CDensity => signals
            .c_density
            .as_deref()
            .ok_or_else(|| missing("c_density needs node features"))?,
        HeuristicKind::Uncertainty => signals
            .uncertainty
            .as_deref()
            .ok_or_else(|| missing("uncertainty needs a trained structural expert"))?,
        HeuristicKind::SoftHomophily => signals
            .soft_homophily
            .as_deref()
            .ok_or_else(|| missing("soft_h needs a trained homophily estimator"))?,
        HeuristicKind::TrueHomophily => signals
            .true_homophily
            .as_deref()
            .ok_or_else(|| missing("true_h needs labels (oracle evaluation only)"))?,
        HeuristicKind::Random => unreachable!(),
    };
    Ok(route_by_metric(eval_ids, metric, kind.direction(), take))
}

fn missing(msg: &str) -> GlanceError {
    GlanceError::Config(format!("missing heuristic dependency: {msg}"))
}

fn route_by_metric(
    eval_ids: &[usize],
    metric: &[f64],
    direction: Direction,
    take: usize,
) -> Vec<usize> {
    let mut order = eval_ids.to_vec();
    order.sort_by(|&a, &b| {
        let cmp = metric[a]
            .partial_cmp(&metric[b])
            .unwrap_or(std::cmp::Ordering::Equal);
        match direction {
            Direction::RouteLowest => cmp.then(a.cmp(&b)),
            Direction::RouteHighest => cmp.reverse().then(a.cmp(&b)),
        }
    });
    let mut picked: Vec<usize> = order.into_iter().take(take).collect();
    picked.sort_unstable();
    picked
}

/// Clustering-density difficulty proxy: seeded k-means (k = num classes,
/// k-means++ init, 50 iterations) over node features; the score is
/// 1/(1 + distance to the nearest centroid), so low score = low density.
pub fn c_density(features: &DenseMatrix, num_classes: usize, seed: u64) -> Result<Vec<f64>> {
    let n = features.rows();
    if n == 0 || num_classes == 0 {
        return Err(GlanceError::Config(
            "c_density needs nodes and classes".into(),
        ));
    }
    let degenerate = (1..n).all(|r| features.row(r) == features.row(0));
    if degenerate {
        log::warn!("c_density: all feature vectors identical; scores are uniform");
        return Ok(vec![1.0; n]);
    }
    let k = num_classes.min(n);
    let mut rng = SeedSplitter::new(seed).stream("c-density");
    let centroids = kmeans(features, k, 50, &mut rng);
    Ok((0..n)
        .map(|v| {
            let d = centroids
                .iter()
                .map(|c| euclidean(features.row(v), c))
                .fold(f64::INFINITY, f64::min);
            1.0 / (1.0 + d)
        })
        .collect())
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn kmeans(
    features: &DenseMatrix,
    k: usize,
    iterations: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<Vec<f64>> {
    use rand::Rng;
    let n = features.rows();
    let d = features.cols();

    // k-means++ seeding
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(features.row(rng.gen_range(0..n)).to_vec());
    while centroids.len() < k {
        let dist2: Vec<f64> = (0..n)
            .map(|v| {
                centroids
                    .iter()
                    .map(|c| {
                        features
                            .row(v)
                            .iter()
                            .zip(c)
                            .map(|(x, y)| (x - y) * (x - y))
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = dist2.iter().sum();
        if total <= 0.0 {
            // all remaining mass on existing centroids; reuse a random row
            centroids.push(features.row(rng.gen_range(0..n)).to_vec());
            continue;
        }
        let mut threshold = rng.gen::<f64>() * total;
        let mut chosen = n - 1;
        for (v, &w) in dist2.iter().enumerate() {
            if threshold <= w {
                chosen = v;
                break;
            }
            threshold -= w;
        }
        centroids.push(features.row(chosen).to_vec());
    }

    let mut assignment = vec![0usize; n];
    for _ in 0..iterations {
        let mut changed = false;
        for (v, slot) in assignment.iter_mut().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (ci, c) in centroids.iter().enumerate() {
                let d2 = features
                    .row(v)
                    .iter()
                    .zip(c)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>();
                if d2 < best_d {
                    best_d = d2;
                    best = ci;
                }
            }
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for v in 0..n {
            counts[assignment[v]] += 1;
            for (s, &x) in sums[assignment[v]].iter_mut().zip(features.row(v)) {
                *s += x;
            }
        }
        for ci in 0..k {
            if counts[ci] > 0 {
                for s in &mut sums[ci] {
                    *s /= counts[ci] as f64;
                }
                centroids[ci] = sums[ci].clone();
            }
        }
        if !changed {
            break;
        }
    }
    centroids
}
