//! Anomaly scores over the reference embedding sets.
//!
//! * base score: `1 - max_j cos(e, n_j)` over the normal set, in `[0, 2]`.
//! * anomaly similarity: `max_i cos(e, a_i)` over the anomalous set, in `[-1, 1]`.
//! * augmented score: the base score while the anomalous set is empty,
//!   otherwise `(1 - gamma) * base + gamma * similarity`.
//!
//! Maxima are exact linear scans; the first maximal member wins ties.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::types::{cosine_unchecked, Embedding};

/// The scoring backend's mutable state: normal and anomalous reference embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSets {
    pub(crate) normal: Vec<Embedding>,
    pub(crate) anomalous: Vec<Embedding>,
    dim: usize,
}

impl ReferenceSets {
    /// Builds reference sets from an initial normal set and an (often empty)
    /// anomalous set. The normal set must be non-empty and all members must
    /// share one dimension.
    pub fn new(normal: Vec<Embedding>, anomalous: Vec<Embedding>) -> Result<Self> {
        let dim = normal.first().ok_or(Error::EmptyNormalSet)?.dim();
        for e in normal.iter().chain(&anomalous) {
            e.check_dim(dim)?;
        }
        Ok(Self {
            normal,
            anomalous,
            dim,
        })
    }

    pub fn with_normals(normal: Vec<Embedding>) -> Result<Self> {
        Self::new(normal, Vec::new())
    }

    pub fn normal(&self) -> &[Embedding] {
        &self.normal
    }

    pub fn anomalous(&self) -> &[Embedding] {
        &self.anomalous
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.normal.len(), self.anomalous.len())
    }
}

/// Blend weight between base score and anomaly similarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorerConfig {
    pub gamma: f64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        Self { gamma: 0.5 }
    }
}

impl ScorerConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        let cfg = Self { gamma };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid("gamma must lie in [0, 1]"));
        }
        Ok(())
    }
}

fn max_similarity(e: &Embedding, set: &[Embedding]) -> f64 {
    set.iter()
        .map(|r| cosine_unchecked(e, r))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Cosine distance from `e` to the closest normal reference.
pub fn base_score(e: &Embedding, refs: &ReferenceSets) -> Result<f64> {
    if refs.normal.is_empty() {
        return Err(Error::EmptyNormalSet);
    }
    e.check_dim(refs.dim)?;
    Ok(1.0 - max_similarity(e, &refs.normal))
}

/// Cosine similarity from `e` to the closest labeled anomaly.
pub fn anomaly_similarity(e: &Embedding, refs: &ReferenceSets) -> Result<f64> {
    if refs.anomalous.is_empty() {
        return Err(Error::EmptyAnomalousSet);
    }
    e.check_dim(refs.dim)?;
    Ok(max_similarity(e, &refs.anomalous))
}

/// Score used both for query decisions and for metric ranking.
pub fn augmented_score(e: &Embedding, refs: &ReferenceSets, cfg: &ScorerConfig) -> Result<f64> {
    let base = base_score(e, refs)?;
    if refs.anomalous.is_empty() {
        return Ok(base);
    }
    let sim = anomaly_similarity(e, refs)?;
    Ok((1.0 - cfg.gamma) * base + cfg.gamma * sim)
}
