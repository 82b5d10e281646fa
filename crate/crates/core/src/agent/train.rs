use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{policy_value_update, ActionMode, AgentConfig, AgentError, Model, ReplayBuffer};
use crate::engine::WorldSpec;
use crate::textproc::FeatureVector;
use crate::worldmodel::Transition;

/// One decision of an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub tokens: Vec<usize>,
    pub features: FeatureVector,
    pub mask: Vec<bool>,
    pub action: usize,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub episode_return: f64,
    pub won: bool,
    pub completion_ratio: f64,
}

/// Plays one episode. Returns the trajectory and the transitions observed
/// (features are encoder outputs at rollout time).
pub fn rollout<R: Rng>(
    model: &Model,
    spec: &WorldSpec,
    mode: ActionMode,
    rng: &mut R,
) -> Result<(Trajectory, Vec<Transition>), AgentError> {
    let (mut state, mut obs) = spec.reset();
    let mut tokens = model.token_ids(&obs.text);
    let mut features = model.features_from_ids(&tokens)?;
    let mut steps = Vec::new();
    let mut transitions = Vec::new();
    loop {
        let mask = model.mask(&obs.admissible)?;
        let logits = model.logits(&features)?;
        let (action, log_prob) = super::select_from_logits(&logits, &mask, mode, rng)?;
        let value = model.state_value(&features)?;
        let cmd = model.alphabet.command(action).expect("alphabet index").clone();
        let (next_state, next_obs) = spec.step(&state, &cmd)?;
        let next_tokens = model.token_ids(&next_obs.text);
        let next_features = model.features_from_ids(&next_tokens)?;
        transitions.push(Transition {
            features: features.clone(),
            action,
            reward: next_obs.reward,
            next_features: next_features.clone(),
            done: next_obs.done,
            priority: 0.0,
        });
        steps.push(Step {
            tokens: std::mem::replace(&mut tokens, next_tokens),
            features: std::mem::replace(&mut features, next_features),
            mask,
            action,
            log_prob,
            reward: next_obs.reward,
            value,
            done: next_obs.done,
        });
        state = next_state;
        obs = next_obs;
        if obs.done {
            break;
        }
    }
    Ok((
        Trajectory {
            episode_return: steps.iter().map(|s| s.reward).sum(),
            won: obs.won,
            completion_ratio: spec.goal_status(&state),
            steps,
        },
        transitions,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub episode_return: f64,
    pub win: bool,
    pub completion_ratio: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub wm_loss: f64,
}

pub const METRICS_HEADER: &str = "episode,return,win,completion_ratio,policy_loss,value_loss,entropy,wm_loss";

/// Training log as CSV with fixed six-decimal reals.
pub fn metrics_csv(rows: &[EpisodeMetrics]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for m in rows {
        writeln!(
            out,
            "{},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            m.episode,
            m.episode_return,
            u8::from(m.win),
            m.completion_ratio,
            m.policy_loss,
            m.value_loss,
            m.entropy,
            m.wm_loss
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    /// Trainer RNG after the last episode.
    pub rng: ChaCha8Rng,
    pub metrics: Vec<EpisodeMetrics>,
}

/// Runs `episodes` on-policy episodes. Each episode: sample-mode rollout,
/// push its transitions to replay, one policy/value update on that
/// trajectory, then `wm_batches` prioritized world-model batches.
///
/// A single ChaCha stream seeded from `seed` drives initialization, action
/// sampling and replay sampling, so runs are reproducible bit for bit.
pub fn train(
    config: &AgentConfig,
    spec: &WorldSpec,
    seed: u64,
    episodes: usize,
    mut on_episode: impl FnMut(&EpisodeMetrics),
) -> Result<TrainOutcome, AgentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = Model::new(spec, config, &mut rng);
    let mut replay = ReplayBuffer::new(config.replay_capacity, config.replay_alpha);
    let optimizer = config.optimizer();
    let mut metrics = Vec::with_capacity(episodes);

    for episode in 0..episodes {
        let abort = |e: AgentError| AgentError::Aborted {
            episode,
            reason: e.to_string(),
        };
        let (traj, transitions) = rollout(&model, spec, ActionMode::Sample, &mut rng).map_err(abort)?;
        for t in transitions {
            replay.push(t);
        }
        let stats = policy_value_update(&mut model, std::slice::from_ref(&traj)).map_err(abort)?;

        let mut wm_total = 0.0;
        for _ in 0..config.wm_batches {
            let k = config.wm_batch_size.min(replay.len());
            let slots = replay.sample(k, &mut rng).map_err(abort)?;
            let mut batch: Vec<Transition> = slots.iter().map(|&s| replay.get(s).unwrap().clone()).collect();
            let loss = model
                .world_model
                .train_batch(&mut model.params, &mut batch, &optimizer)
                .map_err(|e| abort(e.into()))?;
            let priorities: Vec<f64> = batch.iter().map(|t| t.priority).collect();
            replay.set_priorities(&slots, &priorities);
            wm_total += loss;
        }
        let row = EpisodeMetrics {
            episode,
            episode_return: traj.episode_return,
            win: traj.won,
            completion_ratio: traj.completion_ratio,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            wm_loss: if config.wm_batches > 0 {
                wm_total / config.wm_batches as f64
            } else {
                0.0
            },
        };
        let finite = [row.episode_return, row.policy_loss, row.value_loss, row.entropy, row.wm_loss]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(AgentError::Aborted {
                episode,
                reason: "non-finite metric".into(),
            });
        }
        on_episode(&row);
        metrics.push(row);
    }
    Ok(TrainOutcome { model, rng, metrics })
}
