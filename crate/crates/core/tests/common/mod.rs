#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use textrl::agent::{AgentConfig, Model};
use textrl::engine::{builtin_world, explore, Command, WorldSpec};
use textrl::neural::{Optimizer, ParameterSet};
use textrl::worldmodel::Transition;

pub fn world(name: &str) -> WorldSpec {
    builtin_world(name).expect("bundled world")
}

pub const GRAMMAR: &str = include_str!("../../data/corpus/grammar.json");
pub const RANDOM_BASELINE: &str = include_str!("../../data/fixtures/random-baseline-fetch-quest-3.json");

#[derive(Debug, Deserialize)]
pub struct CommandCase {
    pub world: String,
    pub input: String,
    pub expected: Command,
}

#[derive(Debug, Deserialize)]
pub struct ErrorCase {
    pub world: String,
    pub input: String,
    pub error: String,
}

#[derive(Debug, Deserialize)]
pub struct Grammar {
    pub commands: Vec<CommandCase>,
    pub errors: Vec<ErrorCase>,
}

pub fn grammar() -> Grammar {
    serde_json::from_str(GRAMMAR).expect("grammar corpus parses")
}

pub struct WorldModelFit {
    pub train_transitions: usize,
    pub heldout_transitions: usize,
    pub train_loss: f64,
    pub heldout_loss: f64,
    /// Loss of always predicting zero features and zero reward.
    pub heldout_zero_loss: f64,
}

fn mean_loss(model: &Model, params: &ParameterSet, set: &[Transition]) -> f64 {
    set.iter()
        .map(|t| {
            let p = model.world_model.predict(params, &t.features, t.action).unwrap();
            textrl::worldmodel::wm_loss(&p, t)
        })
        .sum::<f64>()
        / set.len() as f64
}

/// Fits the world model on every transition reachable in `spec` (encoder
/// frozen at initialization), then scores transitions re-rendered by the
/// engine during fresh random-agent episodes. Step-limit terminations are
/// excluded from the held-out set because their text depends on the step
/// counter, which the exhaustive enumeration does not vary.
pub fn fit_world_model(spec: &WorldSpec, seed: u64, updates: usize) -> WorldModelFit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = Model::new(spec, &AgentConfig::default(), &mut rng);
    let to_transition = |text: &str, cmd: &Command, reward: f64, next: &str, done: bool| Transition {
        features: model.featurize(text).unwrap(),
        action: model.alphabet.index_of(cmd).unwrap(),
        reward,
        next_features: model.featurize(next).unwrap(),
        done,
        priority: 0.0,
    };
    let mut train: Vec<Transition> = explore(spec, 100_000)
        .iter()
        .map(|t| to_transition(&t.text, &t.command, t.reward, &t.next_text, t.done))
        .collect();

    let mut heldout = Vec::new();
    for _ in 0..50 {
        let (mut state, mut obs) = spec.reset();
        while !obs.done {
            let cmd = obs.admissible.choose(&mut rng).unwrap().clone();
            let (s, o) = spec.step(&state, &cmd).unwrap();
            if o.won || !o.done {
                heldout.push(to_transition(&obs.text, &cmd, o.reward, &o.text, o.done));
            }
            state = s;
            obs = o;
        }
    }

    let optimizer = Optimizer {
        weight_decay: 0.0,
        ..AgentConfig::default().optimizer()
    };
    let mut params = model.params.clone();
    for _ in 0..updates {
        train.shuffle(&mut rng);
        for chunk in train.chunks_mut(32) {
            model.world_model.train_batch(&mut params, chunk, &optimizer).unwrap();
        }
    }
    let zero = heldout
        .iter()
        .map(|t| t.next_features.iter().map(|x| x * x).sum::<f64>() / t.next_features.len() as f64 + t.reward * t.reward)
        .sum::<f64>()
        / heldout.len() as f64;
    WorldModelFit {
        train_transitions: train.len(),
        heldout_transitions: heldout.len(),
        train_loss: mean_loss(&model, &params, &train),
        heldout_loss: mean_loss(&model, &params, &heldout),
        heldout_zero_loss: zero,
    }
}
