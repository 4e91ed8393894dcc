//! Counterfactual losses, advantage rewards, and the closed-form router
//! loss gradient.
//!
//! For a routed node the reward is the loss reduction from querying the
//! text expert net of its cost: l_gnn - l_llm - beta. For an unrouted node
//! it is -l_gnn. The router minimizes -r log pi(f) - lambda * H[pi(f)],
//! applied to pi(f) for both actions as written; an action-log-likelihood
//! variant (log(1 - pi) for the skip action) sits behind a flag.

use crate::error::{GlanceError, Result};
use crate::router::RouterPolicy;
use serde::{Deserialize, Serialize};

/// Probability clamp applied before any log.
const PROB_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewardRecord {
    pub node: usize,
    pub routed: bool,
    pub gnn_loss: f64,
    /// Present exactly when the node was routed.
    pub llm_loss: Option<f64>,
    pub reward: f64,
    /// Routing probability a_v at decision time.
    pub score: f64,
}

/// Cross-entropy of a probability row against the true label, unclipped.
pub fn probability_loss(probs: &[f64], label: usize) -> Result<f64> {
    if label >= probs.len() {
        return Err(GlanceError::Dim(format!(
            "label {} out of range for {} classes",
            label,
            probs.len()
        )));
    }
    Ok(-probs[label].max(f64::MIN_POSITIVE).ln())
}

/// Counterfactual pair for a routed node: the frozen-head loss and the
/// current-refiner loss, both straight cross-entropies of stored
/// probability rows.
pub fn counterfactual_losses(p_h_row: &[f64], p_c_row: &[f64], label: usize) -> Result<(f64, f64)> {
    Ok((
        probability_loss(p_h_row, label)?,
        probability_loss(p_c_row, label)?,
    ))
}

/// Advantage reward. `llm_loss` must be present iff the node was routed.
pub fn reward(routed: bool, gnn_loss: f64, llm_loss: Option<f64>, beta: f64) -> Result<f64> {
    if beta < 0.0 {
        return Err(GlanceError::Config(format!(
            "beta must be >= 0, got {beta}"
        )));
    }
    match (routed, llm_loss) {
        (true, Some(llm)) => Ok(gnn_loss - llm - beta),
        (false, None) => Ok(-gnn_loss),
        (true, None) => Err(GlanceError::Config(
            "routed node without a counterfactual llm loss".into(),
        )),
        (false, Some(_)) => Err(GlanceError::Config(
            "llm loss computed for an unrouted node".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RouterLossMode {
    /// -r log pi(f) for routed and unrouted nodes alike.
    #[default]
    AsWritten,
    /// -r log pi(f) when routed, -r log(1 - pi(f)) when not.
    ActionLogLikelihood,
}

#[derive(Debug, Clone)]
pub struct RouterLossGrad {
    pub loss: f64,
    pub grad_logit: f64,
    pub grad_w: Vec<f64>,
    pub grad_bias: f64,
}

/// Loss and closed-form gradient for one node. The chain runs through the
/// sigmoid: d/dlogit[-r log a] = -r(1-a) and
/// d/dlogit[-lambda H(a)] = lambda a(1-a) log(a/(1-a)).
pub fn router_loss_grad(
    policy: &RouterPolicy,
    features: &[f64],
    r: f64,
    lambda_ent: f64,
    routed: bool,
    mode: RouterLossMode,
) -> Result<RouterLossGrad> {
    let a_raw = policy.score(features)?;
    let a = a_raw.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    let entropy = -a * a.ln() - (1.0 - a) * (1.0 - a).ln();
    let use_skip_likelihood = mode == RouterLossMode::ActionLogLikelihood && !routed;
    let (action_loss, action_grad) = if use_skip_likelihood {
        (-r * (1.0 - a).ln(), r * a)
    } else {
        (-r * a.ln(), -r * (1.0 - a))
    };
    let loss = action_loss - lambda_ent * entropy;
    let grad_logit = action_grad + lambda_ent * a * (1.0 - a) * (a / (1.0 - a)).ln();
    let grad_w: Vec<f64> = features.iter().map(|&f| grad_logit * f).collect();
    Ok(RouterLossGrad {
        loss,
        grad_logit,
        grad_w,
        grad_bias: grad_logit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::router::{FeatureLayout, FeatureSegment};

    fn policy(w: Vec<f64>, bias: f64) -> RouterPolicy {
        let dim = w.len();
        RouterPolicy {
            w,
            bias,
            layout: FeatureLayout {
                segments: vec![FeatureSegment {
                    name: "z_g".into(),
                    dim,
                }],
            },
        }
    }

    #[test]
    fn reward_cases_match_direct_arithmetic() {
        assert!((reward(true, 1.2, Some(0.4), 0.2).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(reward(true, 0.9, Some(0.9), 0.0).unwrap(), 0.0);
        assert_eq!(reward(false, 0.7, None, 0.2).unwrap(), -0.7);
    }

    #[test]
    fn reward_sign_matches_advantage_margin() {
        for (gnn, llm, beta) in [(1.0, 0.5, 0.1), (0.5, 1.0, 0.1), (1.0, 0.85, 0.2)] {
            let r = reward(true, gnn, Some(llm), beta).unwrap();
            assert_eq!(r > 0.0, gnn - llm > beta);
        }
    }

    #[test]
    fn reward_contract_violations_error() {
        assert!(reward(true, 1.0, None, 0.1).is_err());
        assert!(reward(false, 1.0, Some(0.5), 0.1).is_err());
        assert!(reward(true, 1.0, Some(0.5), -0.1).is_err());
    }

    #[test]
    fn counterfactual_matches_straight_recomputation() {
        let p_h = [0.7, 0.2, 0.1];
        let p_c = [0.05, 0.9, 0.05];
        let (gnn, llm) = counterfactual_losses(&p_h, &p_c, 1).unwrap();
        assert!((gnn - (-(0.2f64).ln())).abs() < 1e-12);
        assert!((llm - (-(0.9f64).ln())).abs() < 1e-12);
    }

    #[test]
    fn one_hot_correct_head_loss_near_zero_and_uniform_is_ln_c() {
        let (gnn, llm) = counterfactual_losses(&[1.0, 0.0], &[0.5, 0.5], 0).unwrap();
        assert!(gnn.abs() < 1e-12);
        assert!((llm - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_reward_zero_entropy_gives_zero_gradient() {
        let p = policy(vec![0.3, -0.2], 0.1);
        let out =
            router_loss_grad(&p, &[1.0, 2.0], 0.0, 0.0, true, RouterLossMode::AsWritten).unwrap();
        assert_eq!(out.grad_logit, 0.0);
        assert!(out.grad_w.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn entropy_is_maximal_and_flat_at_half() {
        let p = policy(vec![0.0], 0.0); // a = 0.5
        let out = router_loss_grad(&p, &[0.0], 0.0, 1.0, true, RouterLossMode::AsWritten).unwrap();
        assert!(
            (out.loss + 2.0f64.ln()).abs() < 1e-12,
            "loss = -H(0.5) = -ln 2"
        );
        assert!(
            out.grad_logit.abs() < 1e-12,
            "entropy gradient vanishes at 0.5"
        );
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = crate::rng::stream_from_seed(44);
        use rand::Rng;
        for mode in [
            RouterLossMode::AsWritten,
            RouterLossMode::ActionLogLikelihood,
        ] {
            for routed in [true, false] {
                for _ in 0..10 {
                    let dim = 4;
                    let w: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
                    let bias = rng.gen::<f64>() - 0.5;
                    let f: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                    let r = rng.gen::<f64>() * 2.0 - 1.0;
                    let lambda = 0.05;
                    let p = policy(w.clone(), bias);
                    let out = router_loss_grad(&p, &f, r, lambda, routed, mode).unwrap();
                    let h = 1e-6;
                    for i in 0..dim {
                        let mut wp = w.clone();
                        wp[i] += h;
                        let mut wm = w.clone();
                        wm[i] -= h;
                        let lp = router_loss_grad(&policy(wp, bias), &f, r, lambda, routed, mode)
                            .unwrap()
                            .loss;
                        let lm = router_loss_grad(&policy(wm, bias), &f, r, lambda, routed, mode)
                            .unwrap()
                            .loss;
                        let fd = (lp - lm) / (2.0 * h);
                        let denom = fd.abs().max(out.grad_w[i].abs());
                        if denom < 1e-6 {
                            assert!((out.grad_w[i] - fd).abs() <= 1e-6);
                        } else {
                            assert!(
                                (out.grad_w[i] - fd).abs() / denom <= 1e-4,
                                "mode {mode:?} routed {routed}: {} vs {fd}",
                                out.grad_w[i]
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn positive_reward_step_raises_score_negative_lowers_it() {
        // router update direction: one gradient-descent step on a single
        // routed node moves a_v with the sign of the reward
        for (r, expect_up) in [(0.8, true), (-0.8, false)] {
            let mut p = policy(vec![0.1, -0.1], 0.0);
            let f = vec![0.5, 1.5];
            let before = p.score(&f).unwrap();
            let out = router_loss_grad(&p, &f, r, 0.0, true, RouterLossMode::AsWritten).unwrap();
            let lr = 0.05;
            for (w, g) in p.w.iter_mut().zip(&out.grad_w) {
                *w -= lr * g;
            }
            p.bias -= lr * out.grad_bias;
            let after = p.score(&f).unwrap();
            assert_eq!(after > before, expect_up, "reward {r}");
        }
    }
}
