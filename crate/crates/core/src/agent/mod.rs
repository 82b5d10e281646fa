//! Policy-gradient agent: masked softmax policy over the world's action
//! alphabet, a state-value baseline, entropy-regularized REINFORCE updates,
//! and a prioritized replay buffer that feeds the world model.
//!
//! Policy and value heads learn strictly on-policy from the episode just
//! played; replay is only used for world-model batches.

mod checks;
mod config;
mod model;
mod replay;
mod returns;
mod train;
mod update;

use thiserror::Error;

use crate::neural::NeuralError;
use crate::textproc::TextError;

pub use checks::{check_networks, gradcheck_config, world_model_batch_loss, NetworkCheck, GRADCHECK_EPS, GRADCHECK_TOLERANCE};
pub use config::{AgentConfig, ValueTarget};
pub use model::{select_from_logits, ActionMode, Model, PolicyOutput, EMBEDDING};
pub use replay::ReplayBuffer;
pub use returns::{advantages, discounted_returns, raw_advantages};
pub use train::{metrics_csv, rollout, train, EpisodeMetrics, Step, TrainOutcome, Trajectory, METRICS_HEADER};
pub use update::{policy_value_loss, policy_value_update, UpdateStats};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("no admissible commands")]
    NoAdmissible,
    #[error("command '{0}' is not in the action alphabet")]
    UnknownCommand(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("trajectory is not terminated")]
    Unterminated,
    #[error("replay buffer holds {available} transitions, {requested} requested")]
    InsufficientReplay { available: usize, requested: usize },
    #[error("non-finite loss: {0}")]
    NonFiniteLoss(String),
    #[error("training aborted at episode {episode}: {reason}")]
    Aborted { episode: usize, reason: String },
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
}
