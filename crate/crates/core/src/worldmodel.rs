//! Learned forward model: predicts the next observation's features and the
//! immediate reward from the current features and a one-hot action.
//!
//! Targets are encoder outputs computed when the transition was recorded and
//! are treated as constants, so this loss never reaches the encoder.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::neural::{Gradients, MlpArch, NeuralError, Optimizer, ParameterSet};
use crate::textproc::FeatureVector;

pub const WORLD_MODEL_NET: &str = "wm";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub features: FeatureVector,
    pub action: usize,
    pub reward: f64,
    pub next_features: FeatureVector,
    pub done: bool,
    pub priority: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub next_features: Vec<f64>,
    pub reward: f64,
}

/// Squared error averaged over feature dimensions plus squared reward error.
pub fn wm_loss(prediction: &Prediction, target: &Transition) -> f64 {
    let d = target.next_features.len().max(1) as f64;
    let feat: f64 = prediction
        .next_features
        .iter()
        .zip(target.next_features.iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / d;
    let r = prediction.reward - target.reward;
    feat + r * r
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldModel {
    pub feature_dim: usize,
    pub num_actions: usize,
    pub arch: MlpArch,
}

impl WorldModel {
    pub fn new(feature_dim: usize, num_actions: usize, hidden: &[usize]) -> Self {
        let mut widths = vec![feature_dim + num_actions];
        widths.extend_from_slice(hidden);
        widths.push(feature_dim + 1);
        Self {
            feature_dim,
            num_actions,
            arch: MlpArch::new(WORLD_MODEL_NET, widths),
        }
    }

    pub fn init<R: Rng>(&self, params: &mut ParameterSet, rng: &mut R) {
        self.arch.init(params, rng);
    }

    fn input(&self, features: &[f64], action: usize) -> Result<Vec<f64>, NeuralError> {
        crate::neural::shape_check("world-model features", self.feature_dim, features.len())?;
        if action >= self.num_actions {
            return Err(NeuralError::ShapeMismatch {
                context: "world-model action index".into(),
                expected: self.num_actions,
                actual: action,
            });
        }
        let mut x = Vec::with_capacity(self.feature_dim + self.num_actions);
        x.extend_from_slice(features);
        x.extend((0..self.num_actions).map(|a| if a == action { 1.0 } else { 0.0 }));
        Ok(x)
    }

    pub fn predict(&self, params: &ParameterSet, features: &[f64], action: usize) -> Result<Prediction, NeuralError> {
        let (y, _) = self.arch.forward(params, &self.input(features, action)?)?;
        Ok(split(y, self.feature_dim))
    }

    /// Loss of one transition; accumulates `scale · ∂loss/∂θ` into `grads`.
    pub fn loss_and_grad(
        &self,
        params: &ParameterSet,
        target: &Transition,
        scale: f64,
        grads: &mut Gradients,
    ) -> Result<f64, NeuralError> {
        crate::neural::shape_check("world-model targets", self.feature_dim, target.next_features.len())?;
        let (y, cache) = self.arch.forward(params, &self.input(&target.features, target.action)?)?;
        let d = self.feature_dim as f64;
        let mut upstream: Vec<f64> = y[..self.feature_dim]
            .iter()
            .zip(target.next_features.iter())
            .map(|(p, t)| scale * 2.0 * (p - t) / d)
            .collect();
        upstream.push(scale * 2.0 * (y[self.feature_dim] - target.reward));
        let loss = wm_loss(&split(y, self.feature_dim), target);
        self.arch.backward(params, &cache, &upstream, grads)?;
        Ok(loss)
    }

    /// One optimizer step on the mean batch loss. Returns the pre-update mean
    /// loss and sets each transition's priority to its own loss.
    pub fn train_batch(
        &self,
        params: &mut ParameterSet,
        batch: &mut [Transition],
        optimizer: &Optimizer,
    ) -> Result<f64, NeuralError> {
        if batch.is_empty() {
            return Err(NeuralError::EmptyInput);
        }
        let scale = 1.0 / batch.len() as f64;
        let mut grads = Gradients::new();
        let mut total = 0.0;
        for t in batch.iter_mut() {
            let loss = self.loss_and_grad(params, t, scale, &mut grads)?;
            t.priority = loss;
            total += loss;
        }
        params.l2_penalty(&[WORLD_MODEL_NET], optimizer.weight_decay, &mut grads);
        optimizer.step(params, &grads)?;
        Ok(total * scale)
    }
}

fn split(mut y: Vec<f64>, feature_dim: usize) -> Prediction {
    let reward = y[feature_dim];
    y.truncate(feature_dim);
    Prediction {
        next_features: y,
        reward,
    }
}
