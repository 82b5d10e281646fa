use serde::{Deserialize, Serialize};

use crate::neural::{AdamConfig, Optimizer, OptimizerKind};

/// Regression target for the value head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueTarget {
    /// Discounted Monte Carlo return.
    MonteCarlo,
    /// `r + γ·V(s')` using the values recorded during the rollout.
    Td0,
}

/// Learner hyperparameters. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub embed_dim: usize,
    pub hidden: Vec<usize>,
    pub wm_hidden: Vec<usize>,
    pub gamma: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub weight_decay: f64,
    pub normalize_advantages: bool,
    pub value_target: ValueTarget,
    pub replay_capacity: usize,
    pub replay_alpha: f64,
    pub wm_batches: usize,
    pub wm_batch_size: usize,
    pub vocab_min_count: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            embed_dim: 32,
            hidden: vec![64, 64],
            wm_hidden: vec![64, 64],
            gamma: 0.95,
            entropy_coef: 0.01,
            value_coef: 0.5,
            optimizer: OptimizerKind::Adam,
            lr: 3e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            weight_decay: 1e-5,
            normalize_advantages: false,
            value_target: ValueTarget::MonteCarlo,
            replay_capacity: 10_000,
            replay_alpha: 0.6,
            wm_batches: 1,
            wm_batch_size: 32,
            vocab_min_count: 1,
        }
    }
}

impl AgentConfig {
    pub fn optimizer(&self) -> Optimizer {
        Optimizer {
            kind: self.optimizer,
            adam: AdamConfig {
                lr: self.lr,
                beta1: self.beta1,
                beta2: self.beta2,
                eps: self.adam_eps,
            },
            weight_decay: self.weight_decay,
        }
    }

    /// Rejects values the learner cannot run with; names the offending key.
    pub fn validate(&self) -> Result<(), String> {
        let bad = |k: &str| Err(format!("invalid value for '{k}'"));
        if self.embed_dim == 0 {
            return bad("embed_dim");
        }
        if self.hidden.contains(&0) {
            return bad("hidden");
        }
        if self.wm_hidden.contains(&0) {
            return bad("wm_hidden");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma");
        }
        if !(self.entropy_coef >= 0.0) {
            return bad("entropy_coef");
        }
        if !(self.value_coef >= 0.0) {
            return bad("value_coef");
        }
        if !(self.lr >= 0.0) || !self.lr.is_finite() {
            return bad("lr");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) {
            return bad("beta1");
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("beta2");
        }
        if !(self.adam_eps > 0.0) {
            return bad("adam_eps");
        }
        if !(self.weight_decay >= 0.0) {
            return bad("weight_decay");
        }
        if self.replay_capacity == 0 {
            return bad("replay_capacity");
        }
        if !(self.replay_alpha >= 0.0) {
            return bad("replay_alpha");
        }
        if self.wm_batch_size == 0 {
            return bad("wm_batch_size");
        }
        Ok(())
    }
}
