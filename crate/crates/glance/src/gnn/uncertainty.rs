//! MC-dropout predictive uncertainty: several dropout-perturbed forward
//! passes, aggregated pass-order-independently into a mean distribution
//! per node, scored by normalized entropy (default) or modal-vote
//! disagreement.

use crate::error::{GlanceError, Result};
use crate::gnn::adjacency::NormalizedAdjacency;
use crate::gnn::model::{gcn_forward, GcnModel};
use crate::gnn::train::argmax;
use crate::nn::{normalized_entropy, softmax_row, DenseMatrix};
use crate::rng::SeedSplitter;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintyStat {
    /// Normalized entropy of the MC-mean class distribution.
    #[default]
    Entropy,
    /// 1 - (fraction of passes voting for the modal class).
    Disagreement,
}

pub fn mc_dropout_uncertainty(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    passes: usize,
    rate: f64,
    seed: u64,
    stat: UncertaintyStat,
) -> Result<Vec<f64>> {
    if passes < 2 {
        return Err(GlanceError::Config(format!(
            "mc dropout needs >= 2 passes, got {passes}"
        )));
    }
    let n = x.rows();
    let classes = model.num_classes;
    let splitter = SeedSplitter::new(seed);
    let mut mean = DenseMatrix::zeros(n, classes);
    let mut votes = vec![vec![0usize; classes]; n];
    for pass in 0..passes {
        let mut rng = splitter.stream_indexed("mc-dropout", pass as u64);
        let out = gcn_forward(model, adj, x, rate, Some(&mut rng))?;
        for (v, vote_row) in votes.iter_mut().enumerate() {
            let probs = softmax_row(out.logits.row(v));
            vote_row[argmax(&probs)] += 1;
            for (m, p) in mean.row_mut(v).iter_mut().zip(probs) {
                *m += p;
            }
        }
    }
    let scale = 1.0 / passes as f64;
    mean.map_in_place(|v| v * scale);
    Ok((0..n)
        .map(|v| match stat {
            UncertaintyStat::Entropy => normalized_entropy(mean.row(v)),
            UncertaintyStat::Disagreement => {
                let modal = votes[v].iter().max().copied().unwrap_or(0);
                1.0 - modal as f64 / passes as f64
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::adjacency::normalize_adjacency;
    use crate::gnn::model::GcnConfig;
    use crate::graph::{build_graph, NodeRecord, Split};
    use crate::rng::stream_from_seed;

    fn setup() -> (GcnModel, NormalizedAdjacency, DenseMatrix) {
        let nodes = (0..6)
            .map(|id| NodeRecord {
                id,
                text: String::new(),
                label: id % 2,
                feature: (0..3).map(|j| ((id + j) as f64 * 0.7).sin()).collect(),
                split: Some(Split::Train),
            })
            .collect();
        let g = build_graph(nodes, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)], 2).unwrap();
        let mut rng = stream_from_seed(8);
        let model = GcnModel::new(
            3,
            2,
            &GcnConfig {
                layers: 2,
                hidden_dim: 8,
            },
            &mut rng,
        )
        .unwrap();
        let adj = normalize_adjacency(&g);
        let x = g.feature_matrix();
        (model, adj, x)
    }

    #[test]
    fn rate_zero_equals_single_pass_entropy() {
        let (model, adj, x) = setup();
        let u =
            mc_dropout_uncertainty(&model, &adj, &x, 5, 0.0, 1, UncertaintyStat::Entropy).unwrap();
        let out = gcn_forward(&model, &adj, &x, 0.0, None).unwrap();
        for (v, &uv) in u.iter().enumerate() {
            let single = normalized_entropy(&softmax_row(out.logits.row(v)));
            assert!((uv - single).abs() < 1e-12);
        }
    }

    #[test]
    fn bounds_and_determinism() {
        let (model, adj, x) = setup();
        let a =
            mc_dropout_uncertainty(&model, &adj, &x, 5, 0.3, 4, UncertaintyStat::Entropy).unwrap();
        let b =
            mc_dropout_uncertainty(&model, &adj, &x, 5, 0.3, 4, UncertaintyStat::Entropy).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&u| (0.0..=1.0).contains(&u)));
    }

    #[test]
    fn entropy_extremes() {
        assert!((normalized_entropy(&[0.5, 0.5]) - 1.0).abs() < 1e-12);
        assert_eq!(normalized_entropy(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn disagreement_stat_in_range() {
        let (model, adj, x) = setup();
        let u = mc_dropout_uncertainty(&model, &adj, &x, 5, 0.4, 4, UncertaintyStat::Disagreement)
            .unwrap();
        assert!(u.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn too_few_passes_rejected() {
        let (model, adj, x) = setup();
        assert!(
            mc_dropout_uncertainty(&model, &adj, &x, 1, 0.3, 4, UncertaintyStat::Entropy).is_err()
        );
    }
}
