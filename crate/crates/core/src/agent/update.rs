use super::model::{POLICY_NET, VALUE_NET};
use super::{advantages, discounted_returns, AgentError, Model, Trajectory, ValueTarget, EMBEDDING};
use crate::neural::{entropy, masked_softmax, Gradients};
use crate::textproc::embed_mean_backward;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateStats {
    /// Mean of `-A·log π(a|s)`.
    pub policy_loss: f64,
    /// Mean squared value error.
    pub value_loss: f64,
    /// Mean policy entropy.
    pub entropy: f64,
    /// Full objective, including the L2 term.
    pub total_loss: f64,
}

/// Gradient of `-A·log π(a) - β·H(π)` with respect to the logits, where
/// `π` is the masked softmax: `A·(π - onehot(a)) + β·π·(log π + H)`.
/// Masked entries get zero.
pub fn logit_gradient(probs: &[f64], mask: &[bool], action: usize, advantage: f64, beta: f64) -> Vec<f64> {
    let h = entropy(probs);
    probs
        .iter()
        .zip(mask)
        .enumerate()
        .map(|(j, (&p, &m))| {
            if !m {
                return 0.0;
            }
            let indicator = if j == action { 1.0 } else { 0.0 };
            let mut g = advantage * (p - indicator);
            if p > 0.0 {
                g += beta * p * (p.ln() + h);
            }
            g
        })
        .collect()
}

/// Per-step constants: the advantage and value target, both derived from
/// values recorded at rollout time so no gradient flows through them.
fn step_targets(model: &Model, batch: &[Trajectory]) -> Result<(Vec<f64>, Vec<f64>), AgentError> {
    let gamma = model.config.gamma;
    let mut returns = Vec::new();
    let mut values = Vec::new();
    let mut targets = Vec::new();
    for traj in batch {
        if traj.steps.is_empty() || !traj.steps.last().unwrap().done {
            return Err(AgentError::Unterminated);
        }
        let rewards: Vec<f64> = traj.steps.iter().map(|s| s.reward).collect();
        let g = discounted_returns(&rewards, gamma);
        for (t, step) in traj.steps.iter().enumerate() {
            let target = match model.config.value_target {
                ValueTarget::MonteCarlo => g[t],
                ValueTarget::Td0 => {
                    let bootstrap = if step.done {
                        0.0
                    } else {
                        traj.steps.get(t + 1).map_or(0.0, |s| s.value)
                    };
                    step.reward + gamma * bootstrap
                }
            };
            targets.push(target);
        }
        returns.extend(g);
        values.extend(traj.steps.iter().map(|s| s.value));
    }
    let adv = advantages(&returns, &values, model.config.normalize_advantages)?;
    Ok((adv, targets))
}

/// Objective and its gradient for a batch of finished trajectories:
///
/// `L = mean_t[-A_t·log π(a_t|s_t) - β·H(π(·|s_t)) + c_v·(V(s_t) - target_t)²] + λ/2·‖w‖²`
///
/// Gradients flow through both heads into the shared embeddings.
pub fn policy_value_loss(model: &Model, batch: &[Trajectory]) -> Result<(f64, Gradients, UpdateStats), AgentError> {
    if batch.is_empty() {
        return Err(AgentError::EmptyBatch);
    }
    let (adv, targets) = step_targets(model, batch)?;
    let n_steps = adv.len();
    let scale = 1.0 / n_steps as f64;
    let beta = model.config.entropy_coef;
    let c_v = model.config.value_coef;
    let params = &model.params;
    let emb_shape = params.get(EMBEDDING)?.shape.clone();

    let mut grads = Gradients::new();
    let mut stats = UpdateStats::default();
    let steps = batch.iter().flat_map(|t| t.steps.iter());
    for ((step, &a), &target) in steps.zip(&adv).zip(&targets) {
        let features = model.features_from_ids(&step.tokens)?;
        let (logits, pcache) = model.policy.forward(params, &features)?;
        let probs = masked_softmax(&logits, &step.mask)?;
        let h = entropy(&probs);
        let p_taken = probs[step.action];
        if p_taken <= 0.0 {
            return Err(AgentError::NonFiniteLoss(format!(
                "action {} has zero probability",
                step.action
            )));
        }
        let (v, vcache) = model.value.forward(params, &features)?;
        let v = v[0];

        stats.policy_loss += -a * p_taken.ln();
        stats.entropy += h;
        stats.value_loss += (v - target) * (v - target);

        let mut dlogits = logit_gradient(&probs, &step.mask, step.action, a, beta);
        dlogits.iter_mut().for_each(|d| *d *= scale);
        let dvalue = [scale * 2.0 * c_v * (v - target)];

        let mut dfeat = model.policy.backward(params, &pcache, &dlogits, &mut grads)?;
        let dfeat_v = model.value.backward(params, &vcache, &dvalue, &mut grads)?;
        dfeat.iter_mut().zip(&dfeat_v).for_each(|(x, y)| *x += y);
        embed_mean_backward(&step.tokens, &dfeat, grads.entry(EMBEDDING, &emb_shape));
    }
    stats.policy_loss *= scale;
    stats.entropy *= scale;
    stats.value_loss *= scale;
    let l2 = params.l2_penalty(
        &[EMBEDDING, POLICY_NET, VALUE_NET],
        model.config.weight_decay,
        &mut grads,
    );
    stats.total_loss = stats.policy_loss - beta * stats.entropy + c_v * stats.value_loss + l2;
    if !stats.total_loss.is_finite() {
        return Err(AgentError::NonFiniteLoss(format!("{stats:?}")));
    }
    Ok((stats.total_loss, grads, stats))
}

/// One optimizer step on [`policy_value_loss`].
pub fn policy_value_update(model: &mut Model, batch: &[Trajectory]) -> Result<UpdateStats, AgentError> {
    let (_, grads, stats) = policy_value_loss(model, batch)?;
    model.config.optimizer().step(&mut model.params, &grads)?;
    Ok(stats)
}
