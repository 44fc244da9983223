//! Adam optimizer with bias correction.

use super::{GradientSet, PcnetModel, TrainConfig};

/// First/second moment estimates, one pair per parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamState {
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(model: &PcnetModel) -> Self {
        let shapes: Vec<usize> = model.tensor_slices().iter().map(|t| t.len()).collect();
        Self {
            step: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update:
/// `m <- b1 m + (1-b1) g`, `v <- b2 v + (1-b2) g^2`,
/// `p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)`.
pub fn adam_step(
    model: &mut PcnetModel,
    grads: &GradientSet,
    state: &mut AdamState,
    cfg: &TrainConfig,
) {
    state.step += 1;
    let t = state.step as i32;
    let bias1 = 1.0 - cfg.adam_beta1.powi(t);
    let bias2 = 1.0 - cfg.adam_beta2.powi(t);
    let g_tensors = grads.tensor_slices();
    let mut p_tensors = model.tensor_slices_mut();
    assert_eq!(g_tensors.len(), p_tensors.len(), "gradient layout mismatch");
    for ((params, grad), (m, v)) in p_tensors
        .iter_mut()
        .zip(&g_tensors)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        for i in 0..params.len() {
            let g = grad[i];
            m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g;
            v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g * g;
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
        }
    }
}
