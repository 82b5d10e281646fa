//! Small self-contained numeric core: named parameter tensors, tanh MLPs with
//! hand-written reverse mode, softmax utilities, Adam/SGD and a
//! finite-difference gradient checker.

mod gradcheck;
mod mlp;
mod ops;
mod optim;

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gradcheck::{grad_check, GradCheck};
pub use mlp::{mlp_backward, mlp_forward, MlpArch, MlpCache};
pub use ops::{entropy, masked_softmax, softmax};
pub use optim::{adam_step, sgd_step, AdamConfig, Moments, Optimizer, OptimizerKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NeuralError {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: String,
        expected: usize,
        actual: usize,
    },
    #[error("missing tensor '{0}'")]
    MissingTensor(String),
    #[error("non-finite value in '{tensor}' at index {index}")]
    NonFinite { tensor: String, index: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("no admissible entries in mask")]
    EmptyMask,
    #[error("loss function is not deterministic ({first} vs {second})")]
    NonDeterministic { first: f64, second: f64 },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(&'static str),
    #[error("loss evaluation failed: {0}")]
    LossFailed(String),
}

pub(crate) fn shape_check(context: &str, expected: usize, actual: usize) -> Result<(), NeuralError> {
    if expected == actual {
        Ok(())
    } else {
        Err(NeuralError::ShapeMismatch {
            context: context.to_string(),
            expected,
            actual,
        })
    }
}

/// Dense row-major array of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Self {
        assert_eq!(shape.iter().product::<usize>(), values.len(), "tensor shape/value mismatch");
        Self { shape, values }
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            values: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }
}

/// Biases follow the `<net>.b<i>` naming convention and are exempt from
/// weight decay.
pub fn is_bias(name: &str) -> bool {
    name.rsplit('.')
        .next()
        .is_some_and(|last| last.starts_with('b') && last[1..].chars().all(|c| c.is_ascii_digit()))
}

/// Named trainable tensors plus their optimizer moments.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParameterSet {
    pub tensors: BTreeMap<String, Tensor>,
    #[serde(default)]
    pub moments: BTreeMap<String, Moments>,
}

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) {
        self.tensors.insert(name.into(), tensor);
    }

    pub fn get(&self, name: &str) -> Result<&Tensor, NeuralError> {
        self.tensors
            .get(name)
            .ok_or_else(|| NeuralError::MissingTensor(name.to_string()))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor, NeuralError> {
        self.tensors
            .get_mut(name)
            .ok_or_else(|| NeuralError::MissingTensor(name.to_string()))
    }

    pub fn num_values(&self) -> usize {
        self.tensors.values().map(Tensor::len).sum()
    }

    pub fn check_finite(&self) -> Result<(), NeuralError> {
        for (name, t) in &self.tensors {
            if let Some(index) = t.first_non_finite() {
                return Err(NeuralError::NonFinite {
                    tensor: name.clone(),
                    index,
                });
            }
        }
        Ok(())
    }

    /// Adds `λ/2 · Σ w²` over non-bias tensors whose name starts with one of
    /// `prefixes`, accumulating `λ·w` into `grads`. Returns the penalty.
    pub fn l2_penalty(&self, prefixes: &[&str], lambda: f64, grads: &mut Gradients) -> f64 {
        if lambda == 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        for (name, t) in &self.tensors {
            if is_bias(name) || !prefixes.iter().any(|p| name.starts_with(p)) {
                continue;
            }
            let g = grads.entry(name, &t.shape);
            for (gv, w) in g.values.iter_mut().zip(&t.values) {
                total += w * w;
                *gv += lambda * w;
            }
        }
        0.5 * lambda * total
    }
}

/// Gradient tensors keyed like the [`ParameterSet`] they belong to. Tensors
/// without an entry have zero gradient.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gradients {
    pub tensors: BTreeMap<String, Tensor>,
}

impl Gradients {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros_like(params: &ParameterSet) -> Self {
        Self {
            tensors: params
                .tensors
                .iter()
                .map(|(k, t)| (k.clone(), Tensor::zeros(t.shape.clone())))
                .collect(),
        }
    }

    /// Zero-initialized on first access.
    pub fn entry(&mut self, name: &str, shape: &[usize]) -> &mut Tensor {
        self.tensors
            .entry(name.to_string())
            .or_insert_with(|| Tensor::zeros(shape.to_vec()))
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.get(name)
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors.values_mut() {
            t.values.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn add(&mut self, other: &Gradients) {
        for (name, t) in &other.tensors {
            let dst = self.entry(name, &t.shape);
            for (d, s) in dst.values.iter_mut().zip(&t.values) {
                *d += s;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.tensors.values().all(|t| t.values.iter().all(|&v| v == 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.tensors
            .values()
            .flat_map(|t| t.values.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Glorot-uniform matrix of shape `[fan_out, fan_in]`.
pub fn glorot_uniform<R: Rng>(fan_out: usize, fan_in: usize, rng: &mut R) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit);
    let values = (0..fan_out * fan_in).map(|_| dist.sample(rng)).collect();
    Tensor::new(vec![fan_out, fan_in], values)
}

/// Embedding matrix with N(0, 0.1) entries.
pub fn normal_embeddings<R: Rng>(rows: usize, dim: usize, rng: &mut R) -> Tensor {
    let dist = Normal::new(0.0, 0.1).expect("valid normal");
    let values = (0..rows * dim).map(|_| dist.sample(rng)).collect();
    Tensor::new(vec![rows, dim], values)
}
