use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::{TextError, Vocabulary};
use crate::neural::Tensor;

/// Fixed-length observation encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn check_shape(vocab_len: usize, embeddings: &Tensor) -> Result<usize, TextError> {
    match embeddings.shape.as_slice() {
        [rows, dim] if *rows == vocab_len => Ok(*dim),
        [rows, _] => Err(TextError::DimensionMismatch {
            vocab: vocab_len,
            rows: *rows,
        }),
        _ => Err(TextError::DimensionMismatch {
            vocab: vocab_len,
            rows: 0,
        }),
    }
}

/// Mean of the embedding rows of `ids`; the zero vector when `ids` is empty.
pub fn embed_mean(ids: &[usize], embeddings: &Tensor) -> FeatureVector {
    let dim = embeddings.shape[1];
    let mut out = vec![0.0; dim];
    if ids.is_empty() {
        return FeatureVector(out);
    }
    for &id in ids {
        let row = &embeddings.values[id * dim..(id + 1) * dim];
        for (o, r) in out.iter_mut().zip(row) {
            *o += r;
        }
    }
    let n = ids.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    FeatureVector(out)
}

/// Accumulates the gradient of [`embed_mean`] into `grad` (same shape as the
/// embedding matrix).
pub fn embed_mean_backward(ids: &[usize], upstream: &[f64], grad: &mut Tensor) {
    if ids.is_empty() {
        return;
    }
    let dim = grad.shape[1];
    let n = ids.len() as f64;
    for &id in ids {
        let row = &mut grad.values[id * dim..(id + 1) * dim];
        for (g, u) in row.iter_mut().zip(upstream) {
            *g += u / n;
        }
    }
}

/// Embedding-bag encoding of `text`. Out-of-vocabulary tokens use the
/// `<unk>` row.
pub fn featurize(
    text: &str,
    vocab: &Vocabulary,
    embeddings: &Tensor,
) -> Result<FeatureVector, TextError> {
    check_shape(vocab.len(), embeddings)?;
    Ok(embed_mean(&vocab.encode(text), embeddings))
}
