use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{POLICY_NET, VALUE_NET};
use super::{policy_value_loss, rollout, ActionMode, AgentConfig, AgentError, Model, EMBEDDING};
use crate::engine::WorldSpec;
use crate::neural::{grad_check, GradCheck, Gradients, NeuralError, ParameterSet};
use crate::worldmodel::{Transition, WORLD_MODEL_NET};

pub const GRADCHECK_EPS: f64 = 1e-5;
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

/// Agent configuration used by the gradient-check suite: defaults except a
/// larger L2 coefficient, so that coordinates touched only by weight decay
/// carry gradients well above finite-difference roundoff.
pub fn gradcheck_config() -> AgentConfig {
    AgentConfig {
        weight_decay: 1e-2,
        ..AgentConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkCheck {
    pub network: &'static str,
    pub result: GradCheck,
}

impl NetworkCheck {
    pub fn passed(&self) -> bool {
        self.result.max_rel_error < GRADCHECK_TOLERANCE
    }
}

fn subset(params: &ParameterSet, prefix: &str) -> ParameterSet {
    let mut out = ParameterSet::new();
    for (name, t) in &params.tensors {
        if name == prefix || name.starts_with(&format!("{prefix}.")) {
            out.insert(name.clone(), t.clone());
        }
    }
    out
}

fn restrict(grads: Gradients, keep: &ParameterSet) -> Gradients {
    let mut out = Gradients::new();
    for (name, t) in grads.tensors {
        if keep.tensors.contains_key(&name) {
            out.tensors.insert(name, t);
        }
    }
    out
}

/// Mean world-model loss over `batch` plus L2, with its gradient.
pub fn world_model_batch_loss(
    model: &Model,
    params: &ParameterSet,
    batch: &[Transition],
) -> Result<(f64, Gradients), NeuralError> {
    if batch.is_empty() {
        return Err(NeuralError::EmptyInput);
    }
    let scale = 1.0 / batch.len() as f64;
    let mut grads = Gradients::new();
    let mut total = 0.0;
    for t in batch {
        total += model.world_model.loss_and_grad(params, t, scale, &mut grads)?;
    }
    let l2 = params.l2_penalty(&[WORLD_MODEL_NET], model.config.weight_decay, &mut grads);
    Ok((total * scale + l2, grads))
}

/// Finite-difference checks of the encoder, policy head, value head and
/// world model on a freshly initialized agent for `spec`, using one sampled
/// episode as data. `inject_fault` doubles every analytic gradient, which
/// any working checker must flag.
pub fn check_networks(
    spec: &WorldSpec,
    config: &AgentConfig,
    seed: u64,
    inject_fault: bool,
) -> Result<Vec<NetworkCheck>, AgentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = Model::new(spec, config, &mut rng);
    let (traj, transitions) = rollout(&model, spec, ActionMode::Sample, &mut rng)?;
    let batch = std::slice::from_ref(&traj);
    let fault = if inject_fault { 2.0 } else { 1.0 };

    let mut out = Vec::new();
    for (network, prefix) in [
        ("encoder", EMBEDDING),
        ("policy", POLICY_NET),
        ("value", VALUE_NET),
    ] {
        let params = subset(&model.params, prefix);
        let result = grad_check(&params, GRADCHECK_EPS, 0, |p| {
            let mut m = model.clone();
            m.params.tensors.extend(p.tensors.clone());
            let (loss, mut grads, _) = policy_value_loss(&m, batch).map_err(|e| match e {
                AgentError::Neural(n) => n,
                other => NeuralError::LossFailed(other.to_string()),
            })?;
            grads.scale(fault);
            Ok((loss, restrict(grads, p)))
        })?;
        out.push(NetworkCheck { network, result });
    }

    let params = subset(&model.params, WORLD_MODEL_NET);
    let result = grad_check(&params, GRADCHECK_EPS, 0, |p| {
        let mut full = model.params.clone();
        full.tensors.extend(p.tensors.clone());
        let (loss, mut grads) = world_model_batch_loss(&model, &full, &transitions)?;
        grads.scale(fault);
        Ok((loss, restrict(grads, p)))
    })?;
    out.push(NetworkCheck {
        network: "world model",
        result,
    });
    Ok(out)
}
