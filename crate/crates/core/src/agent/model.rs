use rand::Rng;

use super::{AgentConfig, AgentError};
use crate::engine::{explore, ActionAlphabet, Command, WorldSpec};
use crate::neural::{masked_softmax, normal_embeddings, MlpArch, NeuralError, ParameterSet};
use crate::textproc::{embed_mean, FeatureVector, Vocabulary};
use crate::worldmodel::WorldModel;

/// Name of the shared embedding matrix in the parameter set.
pub const EMBEDDING: &str = "embed";
pub const POLICY_NET: &str = "policy";
pub const VALUE_NET: &str = "value";

/// Cap on observations visited when collecting the vocabulary corpus.
const VOCAB_EXPLORE_NODES: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    Sample,
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub logits: Vec<f64>,
    pub mask: Vec<bool>,
    pub probabilities: Vec<f64>,
}

/// Chooses an action index from masked logits. Returns the index and its
/// log-probability under the masked distribution. Greedy ties go to the
/// lowest index.
pub fn select_from_logits<R: Rng>(
    logits: &[f64],
    mask: &[bool],
    mode: ActionMode,
    rng: &mut R,
) -> Result<(usize, f64), AgentError> {
    if !mask.iter().any(|&m| m) {
        return Err(AgentError::NoAdmissible);
    }
    let probs = masked_softmax(logits, mask)?;
    let choice = match mode {
        ActionMode::Greedy => {
            let mut best = None::<usize>;
            for (i, &m) in mask.iter().enumerate() {
                if m && best.is_none_or(|b| logits[i] > logits[b]) {
                    best = Some(i);
                }
            }
            best.expect("mask has an admissible entry")
        }
        ActionMode::Sample => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = None;
            let mut last = 0;
            for (i, &p) in probs.iter().enumerate() {
                if !mask[i] {
                    continue;
                }
                last = i;
                acc += p;
                if u < acc {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or(last)
        }
    };
    Ok((choice, probs[choice].ln()))
}

/// Everything a trained agent needs: vocabulary, action alphabet, network
/// shapes and parameters.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: AgentConfig,
    pub vocab: Vocabulary,
    pub alphabet: ActionAlphabet,
    pub policy: MlpArch,
    pub value: MlpArch,
    pub world_model: WorldModel,
    pub params: ParameterSet,
}

/// Observation texts reachable in `spec`, used to build the vocabulary.
pub fn world_corpus(spec: &WorldSpec) -> Vec<String> {
    let mut corpus = vec![spec.reset().1.text];
    for t in explore(spec, VOCAB_EXPLORE_NODES) {
        corpus.push(t.next_text);
    }
    corpus
}

impl Model {
    /// Freshly initialized model for `spec`, drawing weights from `rng`.
    pub fn new<R: Rng>(spec: &WorldSpec, config: &AgentConfig, rng: &mut R) -> Self {
        let vocab = Vocabulary::build(&world_corpus(spec), config.vocab_min_count);
        let alphabet = ActionAlphabet::for_spec(spec);
        let mut model = Self::with_shapes(config.clone(), vocab, alphabet);
        let d = config.embed_dim;
        model
            .params
            .insert(EMBEDDING, normal_embeddings(model.vocab.len(), d, rng));
        model.policy.init(&mut model.params, rng);
        model.value.init(&mut model.params, rng);
        model.world_model.init(&mut model.params, rng);
        model
    }

    /// Network shapes with an empty parameter set.
    pub fn with_shapes(config: AgentConfig, vocab: Vocabulary, alphabet: ActionAlphabet) -> Self {
        let d = config.embed_dim;
        let widths = |out: usize| {
            let mut w = vec![d];
            w.extend_from_slice(&config.hidden);
            w.push(out);
            w
        };
        let policy = MlpArch::new(POLICY_NET, widths(alphabet.len()));
        let value = MlpArch::new(VALUE_NET, widths(1));
        let world_model = WorldModel::new(d, alphabet.len(), &config.wm_hidden);
        Self {
            config,
            vocab,
            alphabet,
            policy,
            value,
            world_model,
            params: ParameterSet::new(),
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.config.embed_dim
    }

    pub fn token_ids(&self, text: &str) -> Vec<usize> {
        self.vocab.encode(text)
    }

    pub fn features_from_ids(&self, ids: &[usize]) -> Result<FeatureVector, AgentError> {
        let emb = self.params.get(EMBEDDING)?;
        if emb.shape.first() != Some(&self.vocab.len()) {
            return Err(crate::textproc::TextError::DimensionMismatch {
                vocab: self.vocab.len(),
                rows: emb.shape.first().copied().unwrap_or(0),
            }
            .into());
        }
        Ok(embed_mean(ids, emb))
    }

    pub fn featurize(&self, text: &str) -> Result<FeatureVector, AgentError> {
        self.features_from_ids(&self.token_ids(text))
    }

    /// Alphabet mask for an admissible list; unknown commands are an error.
    pub fn mask(&self, admissible: &[Command]) -> Result<Vec<bool>, AgentError> {
        if admissible.is_empty() {
            return Err(AgentError::NoAdmissible);
        }
        for c in admissible {
            if self.alphabet.index_of(c).is_none() {
                return Err(AgentError::UnknownCommand(c.to_string()));
            }
        }
        Ok(self.alphabet.mask(admissible))
    }

    pub fn logits(&self, features: &[f64]) -> Result<Vec<f64>, NeuralError> {
        Ok(self.policy.forward(&self.params, features)?.0)
    }

    pub fn state_value(&self, features: &[f64]) -> Result<f64, NeuralError> {
        Ok(self.value.forward(&self.params, features)?.0[0])
    }

    pub fn policy_output(&self, features: &[f64], admissible: &[Command]) -> Result<PolicyOutput, AgentError> {
        let mask = self.mask(admissible)?;
        let logits = self.logits(features)?;
        let probabilities = masked_softmax(&logits, &mask)?;
        Ok(PolicyOutput {
            logits,
            mask,
            probabilities,
        })
    }

    pub fn select_action<R: Rng>(
        &self,
        features: &[f64],
        admissible: &[Command],
        mode: ActionMode,
        rng: &mut R,
    ) -> Result<(usize, f64), AgentError> {
        let mask = self.mask(admissible)?;
        let logits = self.logits(features)?;
        select_from_logits(&logits, &mask, mode, rng)
    }

    /// Greedy command for an observation text.
    pub fn act_greedy<R: Rng>(&self, text: &str, admissible: &[Command], rng: &mut R) -> Result<Command, AgentError> {
        let f = self.featurize(text)?;
        let (a, _) = self.select_action(&f, admissible, ActionMode::Greedy, rng)?;
        Ok(self.alphabet.command(a).expect("index from alphabet").clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forced_choice_has_zero_log_prob() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (a, lp) =
            select_from_logits(&[0.3, -1.0, 2.0], &[false, true, false], ActionMode::Sample, &mut rng).unwrap();
        assert_eq!((a, lp), (1, 0.0));
    }

    #[test]
    fn greedy_ties_break_low() {
        let mut logits = vec![0.0; 8];
        logits[3] = 2.0;
        logits[7] = 2.0;
        let mut mask = vec![false; 8];
        mask[3] = true;
        mask[7] = true;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (a, lp) = select_from_logits(&logits, &mask, ActionMode::Greedy, &mut rng).unwrap();
        assert_eq!(a, 3);
        assert!((lp - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn empty_mask_and_bad_logits_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            select_from_logits(&[1.0], &[false], ActionMode::Greedy, &mut rng),
            Err(AgentError::NoAdmissible)
        );
        assert!(matches!(
            select_from_logits(&[f64::NAN, 1.0], &[true, true], ActionMode::Sample, &mut rng),
            Err(AgentError::Neural(NeuralError::NonFinite { .. }))
        ));
    }

    #[test]
    fn model_shapes_follow_world() {
        let spec = crate::engine::tests::fetch_quest();
        let m = Model::new(&spec, &AgentConfig::default(), &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(m.policy.output_width(), m.alphabet.len());
        assert_eq!(m.params.get(EMBEDDING).unwrap().shape, vec![m.vocab.len(), 32]);
        let (_, obs) = spec.reset();
        // every reachable observation token is in the vocabulary
        assert!(m.token_ids(&obs.text).iter().all(|&i| i != crate::textproc::UNK_INDEX));
        let out = m.policy_output(&m.featurize(&obs.text).unwrap(), &obs.admissible).unwrap();
        assert!((out.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m
            .mask(&[Command::Take("dragon".into())])
            .is_err());
    }
}
