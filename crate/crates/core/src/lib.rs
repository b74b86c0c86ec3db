//! Streaming active learning for embedding-based anomaly detection.
//!
//! Samples arrive one at a time as embedding vectors. Each one is scored
//! against a reference set of normal embeddings (and, once labeled anomalies
//! exist, against an anomalous set), a query strategy decides under a labeling
//! budget whether to ask an oracle for its label, and the answer is folded
//! back into the reference sets. Scores are recorded before any update so the
//! resulting [`engine::TrialLog`] supports prequential AUC / pAUC evaluation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
// negated float comparisons are deliberate: they reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;

pub mod engine;
pub mod metrics;
pub mod reference;
pub mod scoring;
pub mod stats;
pub mod strategies;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use types::{cosine_similarity, Domain, Embedding, Label, Sample};
