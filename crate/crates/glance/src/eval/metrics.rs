//! Net correction score, stratified accuracy, average rank, and the
//! routed-set homophily summary.

use crate::error::{GlanceError, Result};
use crate::graph::stratify_bins;
use serde::{Deserialize, Serialize};

/// Net correction score over a routed set: (fixed - broken) / routed,
/// where fixed nodes were wrong under the base model and correct after
/// routing, and broken the reverse. 1 means every routed node was fixed,
/// -1 that every routed node was harmed.
pub fn ncs(gnn_correct: &[bool], post_correct: &[bool], routed: &[usize]) -> Result<f64> {
    if routed.is_empty() {
        return Err(GlanceError::Config("ncs over an empty routed set".into()));
    }
    if gnn_correct.len() != post_correct.len() {
        return Err(GlanceError::Dim("correctness flags not aligned".into()));
    }
    let mut fixed = 0i64;
    let mut broken = 0i64;
    for &v in routed {
        match (gnn_correct[v], post_correct[v]) {
            (false, true) => fixed += 1,
            (true, false) => broken += 1,
            _ => {}
        }
    }
    Ok((fixed - broken) as f64 / routed.len() as f64)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BinAccuracy {
    pub lo: f64,
    pub hi: f64,
    pub population: usize,
    /// Absent (not zero) when the bin is empty.
    pub accuracy: Option<f64>,
}

/// Accuracy per homophily bin. Inputs must already exclude isolated nodes;
/// the slices are aligned.
pub fn stratified_accuracy(
    correct: &[bool],
    h_values: &[f64],
    edges: &[f64],
) -> Result<Vec<BinAccuracy>> {
    if correct.len() != h_values.len() {
        return Err(GlanceError::Dim(format!(
            "{} correctness flags vs {} homophily values",
            correct.len(),
            h_values.len()
        )));
    }
    let bins = stratify_bins(h_values, edges)?;
    let num_bins = edges.len() - 1;
    let mut hit = vec![0usize; num_bins];
    let mut population = vec![0usize; num_bins];
    for (i, &b) in bins.iter().enumerate() {
        population[b] += 1;
        if correct[i] {
            hit[b] += 1;
        }
    }
    Ok((0..num_bins)
        .map(|b| BinAccuracy {
            lo: edges[b],
            hi: edges[b + 1],
            population: population[b],
            accuracy: if population[b] == 0 {
                None
            } else {
                Some(hit[b] as f64 / population[b] as f64)
            },
        })
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodScores {
    pub name: String,
    /// One score per setting; higher is better.
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodRank {
    pub name: String,
    pub mean_rank: f64,
}

/// Mean rank per method across settings, rank 1 = best (highest score),
/// ties sharing the mean of their tied ranks.
pub fn average_rank(table: &[MethodScores]) -> Result<Vec<MethodRank>> {
    if table.is_empty() {
        return Err(GlanceError::Config("empty score table".into()));
    }
    let settings = table[0].scores.len();
    if settings == 0 || table.iter().any(|m| m.scores.len() != settings) {
        return Err(GlanceError::Dim(
            "score table rows must share a non-zero setting count".into(),
        ));
    }
    let mut totals = vec![0.0; table.len()];
    for s in 0..settings {
        // rank with ties averaged: sort descending, walk tie groups
        let mut order: Vec<usize> = (0..table.len()).collect();
        order.sort_by(|&a, &b| {
            table[b].scores[s]
                .partial_cmp(&table[a].scores[s])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && table[order[j + 1]].scores[s] == table[order[i]].scores[s]
            {
                j += 1;
            }
            // positions i..=j share the mean of ranks i+1..=j+1
            let mean = (i + 1 + j + 1) as f64 / 2.0;
            for &m in &order[i..=j] {
                totals[m] += mean;
            }
            i = j + 1;
        }
    }
    Ok(table
        .iter()
        .zip(&totals)
        .map(|(m, &t)| MethodRank {
            name: m.name.clone(),
            mean_rank: t / settings as f64,
        })
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupHomophilySummary {
    pub count: usize,
    pub median: f64,
    /// 10 equal-width bins over [0,1].
    pub histogram: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoutedHomophilySummary {
    /// Nodes the base model got wrong and routing fixed.
    pub benefited: Option<GroupHomophilySummary>,
    /// The remaining routed nodes.
    pub rest: Option<GroupHomophilySummary>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn summarize(mut values: Vec<f64>) -> Option<GroupHomophilySummary> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut histogram = vec![0usize; 10];
    for &v in values.iter() {
        let bin = ((v * 10.0).floor() as usize).min(9);
        histogram[bin] += 1;
    }
    Some(GroupHomophilySummary {
        count: values.len(),
        median: median(&values),
        histogram,
    })
}

/// Homophily medians and histograms of the routed set, split into benefited
/// and non-benefited nodes.
pub fn routed_homophily_summary(
    routed: &[usize],
    benefited: &[bool],
    h_values: &[f64],
) -> Result<RoutedHomophilySummary> {
    if routed.is_empty() {
        return Err(GlanceError::Config(
            "summary over an empty routed set".into(),
        ));
    }
    let mut ben = Vec::new();
    let mut rest = Vec::new();
    for &v in routed {
        if benefited[v] {
            ben.push(h_values[v]);
        } else {
            rest.push(h_values[v]);
        }
    }
    Ok(RoutedHomophilySummary {
        benefited: summarize(ben),
        rest: summarize(rest),
    })
}

pub fn median_of(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(median(&sorted))
}
