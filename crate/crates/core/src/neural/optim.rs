use serde::{Deserialize, Serialize};

use super::{Gradients, NeuralError, ParameterSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 3e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

/// Update rule plus the L2 coefficient callers add to their losses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub adam: AdamConfig,
    pub weight_decay: f64,
}

impl Default for Optimizer {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Adam,
            adam: AdamConfig::default(),
            weight_decay: 1e-5,
        }
    }
}

impl Optimizer {
    pub fn step(&self, params: &mut ParameterSet, grads: &Gradients) -> Result<(), NeuralError> {
        match self.kind {
            OptimizerKind::Adam => adam_step(params, grads, &self.adam),
            OptimizerKind::Sgd => sgd_step(params, grads, self.adam.lr),
        }
    }
}

/// Per-tensor Adam state. `step` counts updates this tensor has received.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

fn check_gradients(params: &ParameterSet, grads: &Gradients) -> Result<(), NeuralError> {
    for (name, g) in &grads.tensors {
        let p = params.get(name)?;
        super::shape_check(name, p.len(), g.len())?;
        if let Some(index) = g.first_non_finite() {
            return Err(NeuralError::NonFinite {
                tensor: format!("grad {name}"),
                index,
            });
        }
    }
    Ok(())
}

/// Bias-corrected Adam descent step on every tensor that has a gradient.
/// Nothing is modified if any gradient is non-finite.
pub fn adam_step(params: &mut ParameterSet, grads: &Gradients, cfg: &AdamConfig) -> Result<(), NeuralError> {
    if !(cfg.lr >= 0.0) {
        return Err(NeuralError::InvalidHyperparameter("lr"));
    }
    if !(cfg.beta1 > 0.0 && cfg.beta1 < 1.0) {
        return Err(NeuralError::InvalidHyperparameter("beta1"));
    }
    if !(cfg.beta2 > 0.0 && cfg.beta2 < 1.0) {
        return Err(NeuralError::InvalidHyperparameter("beta2"));
    }
    if !(cfg.eps > 0.0) {
        return Err(NeuralError::InvalidHyperparameter("eps"));
    }
    check_gradients(params, grads)?;
    for (name, g) in &grads.tensors {
        let n = g.len();
        let moments = params.moments.entry(name.clone()).or_insert_with(|| Moments {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        });
        moments.step += 1;
        let t = moments.step as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        let p = params.tensors.get_mut(name).expect("checked above");
        for i in 0..n {
            let gi = g.values[i];
            moments.m[i] = cfg.beta1 * moments.m[i] + (1.0 - cfg.beta1) * gi;
            moments.v[i] = cfg.beta2 * moments.v[i] + (1.0 - cfg.beta2) * gi * gi;
            let m_hat = moments.m[i] / c1;
            let v_hat = moments.v[i] / c2;
            p.values[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    params.check_finite()
}

/// Plain gradient descent.
pub fn sgd_step(params: &mut ParameterSet, grads: &Gradients, lr: f64) -> Result<(), NeuralError> {
    if !(lr >= 0.0) {
        return Err(NeuralError::InvalidHyperparameter("lr"));
    }
    check_gradients(params, grads)?;
    for (name, g) in &grads.tensors {
        let p = params.tensors.get_mut(name).expect("checked above");
        for (pv, gv) in p.values.iter_mut().zip(&g.values) {
            *pv -= lr * gv;
        }
    }
    params.check_finite()
}
