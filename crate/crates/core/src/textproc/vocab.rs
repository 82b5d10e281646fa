use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::tokenize;

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const PAD_INDEX: usize = 0;
pub const UNK_INDEX: usize = 1;

/// Dense token index. Indices 0 and 1 are `<pad>` and `<unk>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Tokens with frequency at least `min_count` (clamped to 1), ordered by
    /// descending frequency then lexicographically.
    pub fn build<S: AsRef<str>>(corpus: &[S], min_count: usize) -> Self {
        let min_count = min_count.max(1);
        let mut counts: HashMap<String, usize> = HashMap::new();
        for doc in corpus {
            for t in tokenize(doc.as_ref()) {
                *counts.entry(t).or_default() += 1;
            }
        }
        let mut kept: Vec<(String, usize)> =
            counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let tokens = [PAD.to_string(), UNK.to_string()]
            .into_iter()
            .chain(kept.into_iter().map(|(t, _)| t))
            .collect();
        Self::from_tokens(tokens).expect("reserved tokens present")
    }

    /// Rebuilds from a stored token list; `None` unless the reserved tokens
    /// lead and no token repeats.
    pub fn from_tokens(tokens: Vec<String>) -> Option<Self> {
        if tokens.len() < 2 || tokens[PAD_INDEX] != PAD || tokens[UNK_INDEX] != UNK {
            return None;
        }
        let index: HashMap<String, usize> =
            tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if index.len() != tokens.len() {
            return None;
        }
        Some(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Index of `token`, or `<unk>`.
    pub fn lookup(&self, token: &str) -> usize {
        self.get(token).unwrap_or(UNK_INDEX)
    }

    pub fn encode(&self, text: &str) -> Vec<usize> {
        tokenize(text).iter().map(|t| self.lookup(t)).collect()
    }
}

impl Serialize for Vocabulary {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.tokens.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let tokens = Vec::<String>::deserialize(d)?;
        Vocabulary::from_tokens(tokens)
            .ok_or_else(|| serde::de::Error::custom("vocabulary must start with <pad>, <unk> and be unique"))
    }
}

/// Free-function form of [`Vocabulary::build`].
pub fn build_vocab<S: AsRef<str>>(corpus: &[S], min_count: usize) -> Vocabulary {
    Vocabulary::build(corpus, min_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus_has_reserved_only() {
        let v = build_vocab::<&str>(&[], 1);
        assert_eq!(v.len(), 2);
        assert_eq!(v.get(PAD), Some(0));
        assert_eq!(v.get(UNK), Some(1));
    }

    #[test]
    fn ordering_rule() {
        let v = build_vocab(&["a a b"], 1);
        assert_eq!(v.tokens(), ["<pad>", "<unk>", "a", "b"]);
        let v = build_vocab(&["a a b"], 2);
        assert_eq!(v.get("b"), None);
        assert_eq!(v.lookup("b"), UNK_INDEX);
        let v = build_vocab(&["c b", "b c a"], 1);
        assert_eq!(v.tokens(), ["<pad>", "<unk>", "b", "c", "a"]);
    }

    #[test]
    fn serde_validates() {
        let v = build_vocab(&["x y"], 1);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<Vocabulary>(&json).unwrap(), v);
        assert!(serde_json::from_str::<Vocabulary>(r#"["x","<unk>"]"#).is_err());
        assert!(serde_json::from_str::<Vocabulary>(r#"["<pad>","<unk>","a","a"]"#).is_err());
    }
}
