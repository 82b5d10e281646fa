//! Reinforcement-learning laboratory for text adventures.
//!
//! * [`engine`]: deterministic text-adventure worlds loaded from JSON.
//! * [`textproc`]: tokenizer, command parser, vocabulary, embedding-bag encoder.
//! * [`neural`]: tanh MLPs with manual backprop, Adam, gradient checking.
//! * [`worldmodel`]: learned next-observation and reward predictor.
//! * [`agent`]: masked policy-gradient learner with a value baseline and
//!   prioritized replay feeding the world model.
//! * [`harness`]: baseline agents, evaluation and statistical comparison.
//! * [`cli`]: the `textrl` command-line front end.

// Negated float comparisons are used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod agent;
pub mod checkpoint;
pub mod cli;
pub mod engine;
pub mod harness;
pub mod neural;
pub mod textproc;
pub mod worldmodel;
