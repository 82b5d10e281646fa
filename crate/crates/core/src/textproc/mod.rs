//! Text parsing and featurization: tokenizer, command parser, vocabulary
//! and the embedding-bag observation encoder.

mod encoder;
mod parser;
mod tokenize;
mod vocab;

use thiserror::Error;

pub use encoder::{embed_mean, embed_mean_backward, featurize, FeatureVector};
pub use parser::{parse_command, parse_input, ParseError};
pub use tokenize::tokenize;
pub use vocab::{build_vocab, Vocabulary, PAD, PAD_INDEX, UNK, UNK_INDEX};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("embedding matrix has {rows} rows but vocabulary has {vocab} tokens")]
    DimensionMismatch { vocab: usize, rows: usize },
}
