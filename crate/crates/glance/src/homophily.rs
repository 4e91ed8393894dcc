//! Label-free local homophily estimation.
//!
//! An MLP is trained on raw node features alone (never graph structure),
//! and its predictions over all nodes drive two per-node estimates: a hard
//! estimate counting neighbor argmax agreement, and a soft estimate dotting
//! the node's class distribution with its neighbors' mean distribution.
//! Both use only predicted quantities, so they are available at inference.

use crate::error::{GlanceError, Result};
use crate::graph::metrics::ISOLATED_SENTINEL;
use crate::graph::{Split, TextAttributedGraph};
use crate::nn::checkpoint::{load_mlp, save_mlp};
use crate::nn::{
    clip_gradients, mlp_backward, mlp_forward, softmax_cross_entropy, softmax_rows, DenseMatrix,
    MlpModel, OptimizerState, TrainConfig,
};
use crate::rng::SeedSplitter;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const Q_CHECKPOINT_KIND: &str = "q-estimator";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QTrainMeta {
    pub seed: u64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
}

/// The trained feature-only classifier and its training metadata.
#[derive(Debug, Clone)]
pub struct HomophilyEstimator {
    pub q: MlpModel,
    pub meta: QTrainMeta,
}

impl HomophilyEstimator {
    /// Class probabilities for every node. Uses features only; labels and
    /// edges never enter.
    pub fn predict_probs(&self, g: &TextAttributedGraph) -> Result<DenseMatrix> {
        let (logits, _) = mlp_forward(&self.q, &g.feature_matrix(), 0.0, None)?;
        Ok(softmax_rows(&logits))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_mlp(path, &self.q, Q_CHECKPOINT_KIND)
    }

    pub fn load(path: &Path) -> Result<MlpModel> {
        load_mlp(path, Q_CHECKPOINT_KIND)
    }
}

/// Train the estimator on train-split features and labels. Full-batch
/// AdamW with clipping, best-validation-accuracy checkpoint.
pub fn train_q(g: &TextAttributedGraph, cfg: &TrainConfig) -> Result<HomophilyEstimator> {
    cfg.validate()?;
    let train_ids = g.split_ids(Split::Train);
    let val_ids = g.split_ids(Split::Val);
    if train_ids.is_empty() || val_ids.is_empty() {
        return Err(GlanceError::Config(
            "q training needs non-empty train and val splits".into(),
        ));
    }
    let splitter = SeedSplitter::new(cfg.seed);
    let mut init_rng = splitter.stream("q-init");
    let mut model = MlpModel::new(&[g.feature_dim(), 64, g.num_classes()], &mut init_rng)?;
    let x = g.feature_matrix();
    let labels: Vec<usize> = (0..g.num_nodes()).map(|v| g.label(v)).collect();
    let mut opt = OptimizerState::new(cfg.learning_rate, cfg.weight_decay, &model.param_shapes());

    let mut best = model.clone();
    let mut best_val = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut epochs_run = 0;
    for epoch in 1..=cfg.max_epochs {
        epochs_run = epoch;
        let mut drop_rng = splitter.stream_indexed("q-dropout", epoch as u64);
        let (logits, cache) = mlp_forward(&model, &x, cfg.dropout_rate, Some(&mut drop_rng))?;
        let scale = 1.0 / train_ids.len() as f64;
        let mut grad = DenseMatrix::zeros(logits.rows(), logits.cols());
        let mut loss = 0.0;
        for &r in &train_ids {
            let (l, gr) = softmax_cross_entropy(logits.row(r), labels[r])?;
            loss += l;
            for (out, v) in grad.row_mut(r).iter_mut().zip(gr) {
                *out = v * scale;
            }
        }
        loss *= scale;
        if !loss.is_finite() {
            return Err(GlanceError::Divergence { epoch });
        }
        let mut grads = mlp_backward(&model, &cache, &grad)?;
        let mut flat: Vec<&mut [f64]> = Vec::new();
        for (gw, gb) in &mut grads.layers {
            flat.push(gw.values_mut());
            flat.push(gb.as_mut_slice());
        }
        clip_gradients(&mut flat, cfg.clip_norm);
        opt.step(&mut model.params_mut(), &grads.flat())?;

        let (eval_logits, _) = mlp_forward(&model, &x, 0.0, None)?;
        let val_acc = val_ids
            .iter()
            .filter(|&&r| crate::gnn::argmax(eval_logits.row(r)) == labels[r])
            .count() as f64
            / val_ids.len() as f64;
        if val_acc > best_val {
            best_val = val_acc;
            best = model.clone();
            best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    Ok(HomophilyEstimator {
        q: best,
        meta: QTrainMeta {
            seed: cfg.seed,
            epochs_run,
            best_epoch,
            best_val_accuracy: best_val,
        },
    })
}

/// Hard estimate: the fraction of v's neighbors whose predicted class
/// matches v's predicted class. Isolated nodes get the sentinel.
pub fn hard_homophily_estimate(g: &TextAttributedGraph, probs: &DenseMatrix) -> Vec<f64> {
    let pred: Vec<usize> = (0..g.num_nodes())
        .map(|v| crate::gnn::argmax(probs.row(v)))
        .collect();
    (0..g.num_nodes())
        .map(|v| {
            let neighbors = g.neighbors(v);
            if neighbors.is_empty() {
                return ISOLATED_SENTINEL;
            }
            let same = neighbors
                .iter()
                .filter(|&&u| pred[u as usize] == pred[v])
                .count();
            same as f64 / neighbors.len() as f64
        })
        .collect()
}

/// Soft estimate: dot product of v's class distribution with the mean
/// distribution over v's 1-hop neighbors. Isolated nodes get the sentinel.
pub fn soft_homophily(g: &TextAttributedGraph, probs: &DenseMatrix) -> Vec<f64> {
    let classes = probs.cols();
    (0..g.num_nodes())
        .map(|v| {
            let neighbors = g.neighbors(v);
            if neighbors.is_empty() {
                return ISOLATED_SENTINEL;
            }
            let mut mean = vec![0.0; classes];
            for &u in neighbors {
                for (m, &p) in mean.iter_mut().zip(probs.row(u as usize)) {
                    *m += p;
                }
            }
            let scale = 1.0 / neighbors.len() as f64;
            probs
                .row(v)
                .iter()
                .zip(&mean)
                .map(|(&a, &b)| a * b * scale)
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, local_homophily, NodeRecord, Split};
    use crate::graph::{synth_generate, MixtureComponent, SynthConfig};
    use rand::Rng;

    fn ring_graph(labels: &[usize], classes: usize) -> TextAttributedGraph {
        let n = labels.len();
        let nodes = labels
            .iter()
            .enumerate()
            .map(|(id, &label)| {
                let mut feature = vec![0.0; classes];
                feature[label] = 1.0;
                NodeRecord {
                    id,
                    text: String::new(),
                    label,
                    feature,
                    split: Some(if id % 2 == 0 {
                        Split::Train
                    } else {
                        Split::Val
                    }),
                }
            })
            .collect();
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        build_graph(nodes, &edges, classes).unwrap()
    }

    fn one_hot_probs(g: &TextAttributedGraph, assign: &[usize]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(g.num_nodes(), g.num_classes());
        for (v, &c) in assign.iter().enumerate() {
            m.set(v, c, 1.0);
        }
        m
    }

    #[test]
    fn perfect_predictions_recover_true_homophily() {
        let labels: Vec<usize> = (0..20).map(|i| (i / 5) % 3).collect();
        let g = ring_graph(&labels, 3);
        let probs = one_hot_probs(&g, &labels);
        let hard = hard_homophily_estimate(&g, &probs);
        for (v, &h) in hard.iter().enumerate() {
            assert_eq!(h, local_homophily(&g, v));
        }
    }

    #[test]
    fn constant_predictor_gives_all_ones() {
        let labels: Vec<usize> = (0..10).map(|i| i % 2).collect();
        let g = ring_graph(&labels, 2);
        let probs = one_hot_probs(&g, &[0; 10]);
        assert!(hard_homophily_estimate(&g, &probs)
            .iter()
            .all(|&h| h == 1.0));
    }

    #[test]
    fn one_hot_soft_collapses_to_hard() {
        let mut rng = crate::rng::stream_from_seed(6);
        let labels: Vec<usize> = (0..30).map(|_| rng.gen_range(0..3)).collect();
        let g = ring_graph(&labels, 3);
        let assign: Vec<usize> = (0..30).map(|_| rng.gen_range(0..3)).collect();
        let probs = one_hot_probs(&g, &assign);
        let hard = hard_homophily_estimate(&g, &probs);
        let soft = soft_homophily(&g, &probs);
        for v in 0..30 {
            assert!((hard[v] - soft[v]).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_predictor_soft_is_one_over_c() {
        let labels: Vec<usize> = (0..12).map(|i| i % 4).collect();
        let g = ring_graph(&labels, 4);
        let mut probs = DenseMatrix::zeros(12, 4);
        probs.map_in_place(|_| 0.25);
        let soft = soft_homophily(&g, &probs);
        assert!(soft.iter().all(|&s| (s - 0.25).abs() < 1e-12));
    }

    #[test]
    fn soft_matches_double_loop_oracle_and_stays_in_unit_interval() {
        let mut rng = crate::rng::stream_from_seed(7);
        let labels: Vec<usize> = (0..50).map(|_| rng.gen_range(0..3)).collect();
        let g = ring_graph(&labels, 3);
        let mut probs = DenseMatrix::zeros(50, 3);
        for v in 0..50 {
            let raw: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let sum: f64 = raw.iter().sum();
            for (c, r) in raw.iter().enumerate() {
                probs.set(v, c, r / sum);
            }
        }
        let soft = soft_homophily(&g, &probs);
        for (v, &soft_v) in soft.iter().enumerate() {
            let neighbors = g.neighbors(v);
            let mut expected = 0.0;
            for c in 0..3 {
                let mut mean = 0.0;
                for &u in neighbors {
                    mean += probs.get(u as usize, c);
                }
                expected += probs.get(v, c) * mean / neighbors.len() as f64;
            }
            assert!((soft_v - expected).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&soft_v));
        }
    }

    #[test]
    fn q_never_sees_edges() {
        // deleting all edges before training leaves Q unchanged
        let cfg = SynthConfig {
            num_nodes: 120,
            num_classes: 3,
            feature_noise: 0.0,
            homophily_mixture: vec![MixtureComponent {
                target: 0.6,
                fraction: 1.0,
            }],
            seed: 3,
            ..Default::default()
        };
        let out = synth_generate(&cfg).unwrap();
        let g = out.graph;
        let mut records: Vec<NodeRecord> = (0..g.num_nodes())
            .map(|v| NodeRecord {
                id: v,
                text: g.text(v).to_string(),
                label: g.label(v),
                feature: g.feature(v).to_vec(),
                split: Some(g.split(v)),
            })
            .collect();
        records.sort_by_key(|r| r.id);
        let edgeless = build_graph(records, &[], g.num_classes()).unwrap();

        let tc = TrainConfig {
            max_epochs: 40,
            patience: 40,
            dropout_rate: 0.0,
            seed: 11,
            ..Default::default()
        };
        let q1 = train_q(&g, &tc).unwrap();
        let q2 = train_q(&edgeless, &tc).unwrap();
        for (a, b) in q1.q.layers.iter().zip(&q2.q.layers) {
            assert_eq!(a.w.values(), b.w.values());
            assert_eq!(a.b, b.b);
        }
    }

    #[test]
    fn noiseless_one_hot_features_reach_full_val_accuracy() {
        let cfg = SynthConfig {
            num_nodes: 200,
            num_classes: 3,
            feature_noise: 0.0,
            homophily_mixture: vec![MixtureComponent {
                target: 0.7,
                fraction: 1.0,
            }],
            seed: 5,
            ..Default::default()
        };
        let out = synth_generate(&cfg).unwrap();
        let tc = TrainConfig {
            max_epochs: 150,
            patience: 150,
            dropout_rate: 0.0,
            seed: 2,
            ..Default::default()
        };
        let est = train_q(&out.graph, &tc).unwrap();
        assert_eq!(est.meta.best_val_accuracy, 1.0);
    }

    #[test]
    fn isolated_nodes_get_sentinel() {
        let nodes = vec![
            NodeRecord {
                id: 0,
                text: String::new(),
                label: 0,
                feature: vec![1.0, 0.0],
                split: Some(Split::Train),
            },
            NodeRecord {
                id: 1,
                text: String::new(),
                label: 1,
                feature: vec![0.0, 1.0],
                split: Some(Split::Val),
            },
        ];
        let g = build_graph(nodes, &[], 2).unwrap();
        let probs = DenseMatrix::from_vec(2, 2, vec![0.9, 0.1, 0.2, 0.8]).unwrap();
        assert_eq!(
            hard_homophily_estimate(&g, &probs),
            vec![ISOLATED_SENTINEL; 2]
        );
        assert_eq!(soft_homophily(&g, &probs), vec![ISOLATED_SENTINEL; 2]);
    }
}
