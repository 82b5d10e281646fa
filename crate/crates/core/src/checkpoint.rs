//! JSON checkpoints: vocabulary, architecture, parameters, optimizer
//! moments and trainer RNG state.

use std::collections::BTreeMap;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{AgentConfig, Model, EMBEDDING};
use crate::engine::{ActionAlphabet, Command, WorldSpec};
use crate::neural::{MlpArch, Moments, ParameterSet, Tensor};
use crate::textproc::Vocabulary;
use crate::worldmodel::WorldModel;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Parse(String),
    #[error("unsupported checkpoint format_version {found} (expected {expected})")]
    Version { found: u64, expected: u32 },
    #[error("checkpoint action alphabet does not match the world")]
    AlphabetMismatch,
    #[error("checkpoint architecture is inconsistent: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Architecture {
    pub embed_dim: usize,
    pub policy: MlpArch,
    pub value: MlpArch,
    pub world_model: WorldModel,
    /// Global action alphabet in index order.
    pub actions: Vec<Command>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub episodes_trained: usize,
    pub config: AgentConfig,
    pub vocab: Vocabulary,
    pub arch: Architecture,
    pub tensors: BTreeMap<String, Tensor>,
    pub optimizer: BTreeMap<String, Moments>,
    pub rng: ChaCha8Rng,
}

impl Checkpoint {
    pub fn new(model: &Model, rng: &ChaCha8Rng, episodes_trained: usize) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            episodes_trained,
            config: model.config.clone(),
            vocab: model.vocab.clone(),
            arch: Architecture {
                embed_dim: model.config.embed_dim,
                policy: model.policy.clone(),
                value: model.value.clone(),
                world_model: model.world_model.clone(),
                actions: model.alphabet.commands().to_vec(),
            },
            tensors: model.params.tensors.clone(),
            optimizer: model.params.moments.clone(),
            rng: rng.clone(),
        }
    }

    /// Pretty JSON terminated by a newline. Deterministic: maps are ordered.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("checkpoint serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| CheckpointError::Parse(e.to_string()))?;
        let version = raw
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| CheckpointError::Parse("missing format_version".into()))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(CheckpointError::Version {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let ckpt: Self = serde_json::from_value(raw).map_err(|e| CheckpointError::Parse(e.to_string()))?;
        ckpt.model()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Rebuilds the model, checking every tensor against the architecture.
    pub fn model(&self) -> Result<Model, CheckpointError> {
        let bad = |m: String| CheckpointError::Inconsistent(m);
        let alphabet = ActionAlphabet::from_commands(self.arch.actions.clone())
            .ok_or_else(|| bad("duplicate action".into()))?;
        if self.arch.embed_dim != self.config.embed_dim {
            return Err(bad("embed_dim differs from config".into()));
        }
        let mut model = Model::with_shapes(self.config.clone(), self.vocab.clone(), alphabet);
        for (name, ours, theirs) in [
            ("policy", &model.policy, &self.arch.policy),
            ("value", &model.value, &self.arch.value),
            ("world model", &model.world_model.arch, &self.arch.world_model.arch),
        ] {
            if ours != theirs {
                return Err(bad(format!("{name} network shape")));
            }
        }
        let mut expected: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        expected.insert(EMBEDDING.into(), vec![self.vocab.len(), self.arch.embed_dim]);
        for arch in [&model.policy, &model.value, &model.world_model.arch] {
            for l in 0..arch.layers() {
                expected.insert(arch.weight_name(l), vec![arch.widths[l + 1], arch.widths[l]]);
                expected.insert(arch.bias_name(l), vec![arch.widths[l + 1]]);
            }
        }
        if expected.len() != self.tensors.len() {
            return Err(bad(format!(
                "expected {} tensors, found {}",
                expected.len(),
                self.tensors.len()
            )));
        }
        for (name, shape) in &expected {
            let t = self
                .tensors
                .get(name)
                .ok_or_else(|| bad(format!("missing tensor {name}")))?;
            if &t.shape != shape || t.values.len() != shape.iter().product::<usize>() {
                return Err(bad(format!("tensor {name} has shape {:?}, expected {shape:?}", t.shape)));
            }
            if t.first_non_finite().is_some() {
                return Err(bad(format!("tensor {name} has non-finite values")));
            }
        }
        for name in self.optimizer.keys() {
            if !expected.contains_key(name) {
                return Err(bad(format!("optimizer state for unknown tensor {name}")));
            }
        }
        model.params = ParameterSet {
            tensors: self.tensors.clone(),
            moments: self.optimizer.clone(),
        };
        Ok(model)
    }

    /// Model for playing `spec`; the world must produce the same alphabet.
    pub fn model_for(&self, spec: &WorldSpec) -> Result<Model, CheckpointError> {
        let model = self.model()?;
        if ActionAlphabet::for_spec(spec).commands() != model.alphabet.commands() {
            return Err(CheckpointError::AlphabetMismatch);
        }
        Ok(model)
    }
}
