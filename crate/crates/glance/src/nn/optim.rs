//! AdamW with decoupled weight decay, plus global-norm gradient clipping.

use crate::error::{GlanceError, Result};

/// Per-parameter first/second moment accumulators and step counter.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl OptimizerState {
    /// `shapes` are flat lengths of each parameter tensor, in the order the
    /// caller will pass them to `step`.
    pub fn new(learning_rate: f64, weight_decay: f64, shapes: &[usize]) -> Self {
        Self {
            learning_rate,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            first: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One AdamW update. Decay is decoupled: it scales the parameter
    /// directly and never enters the moments.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != self.first.len() {
            return Err(GlanceError::Dim(format!(
                "optimizer tracks {} tensors, got {} params / {} grads",
                self.first.len(),
                params.len(),
                grads.len()
            )));
        }
        for i in 0..params.len() {
            if params[i].len() != self.first[i].len() || grads[i].len() != self.first[i].len() {
                return Err(GlanceError::Dim(format!(
                    "optimizer tensor {} expects {} values",
                    i,
                    self.first[i].len()
                )));
            }
        }
        self.step += 1;
        let t = self.step as f64;
        let bias1 = 1.0 - self.beta1.powf(t);
        let bias2 = 1.0 - self.beta2.powf(t);
        for i in 0..params.len() {
            let m = &mut self.first[i];
            let v = &mut self.second[i];
            let p = &mut *params[i];
            let g = grads[i];
            for j in 0..p.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                let m_hat = m[j] / bias1;
                let v_hat = v[j] / bias2;
                p[j] -= self.learning_rate
                    * (m_hat / (v_hat.sqrt() + self.epsilon) + self.weight_decay * p[j]);
                if !p[j].is_finite() {
                    return Err(GlanceError::NonFinite(format!("adamw param tensor {i}")));
                }
            }
        }
        Ok(())
    }
}

/// Global L2 norm across all tensors jointly.
pub fn global_norm(grads: &[&[f64]]) -> f64 {
    grads
        .iter()
        .flat_map(|g| g.iter())
        .map(|&v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Clip to `max_norm` by a single global scale. Returns the pre-clip norm.
pub fn clip_gradients(grads: &mut [&mut [f64]], max_norm: f64) -> f64 {
    let norm = grads
        .iter()
        .flat_map(|g| g.iter())
        .map(|&v| v * v)
        .sum::<f64>()
        .sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for g in grads.iter_mut() {
            for v in g.iter_mut() {
                *v *= scale;
            }
        }
    }
    norm
}
