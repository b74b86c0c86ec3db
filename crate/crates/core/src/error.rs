use alloc::string::String;

/// Errors produced by the active-learning core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("embedding has zero dimensions")]
    EmptyEmbedding,
    #[error("embedding component {index} is not finite")]
    NonFinite { index: usize },
    #[error("embedding has zero norm")]
    ZeroNorm,
    #[error("reference normal set is empty")]
    EmptyNormalSet,
    #[error("reference anomalous set is empty")]
    EmptyAnomalousSet,
    #[error("input collection is empty")]
    EmptyInput,
    #[error("k-means needs at least k = {k} points, got {points}")]
    TooFewPoints { k: usize, points: usize },
    #[error("committee needs at least 2 members, got {0}")]
    CommitteeTooSmall(usize),
    #[error("value {0} is not strictly positive")]
    NonPositive(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("oracle failed for sample {id}: {reason}")]
    Oracle { id: String, reason: String },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}
