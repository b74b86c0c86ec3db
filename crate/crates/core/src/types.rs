//! Embeddings, labels, samples and the cosine kernel every score is built on.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// A validated, immutable embedding vector.
///
/// Components are finite and the vector is non-zero, so cosine similarity is
/// always defined. The squared norm is computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    values: Vec<f64>,
    sq_norm: f64,
}

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyEmbedding);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let sq_norm = math::dot(&values, &values);
        if sq_norm == 0.0 || !sq_norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { values, sq_norm })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.sq_norm)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Returns a unit-norm copy.
    pub fn normalized(&self) -> Self {
        let norm = self.norm();
        let values: Vec<f64> = self.values.iter().map(|v| v / norm).collect();
        let sq_norm = math::dot(&values, &values);
        Self { values, sq_norm }
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Embedding {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

/// Ground-truth machine condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Normal = 0,
    Anomalous = 1,
}

impl Label {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Label::Normal),
            1 => Some(Label::Anomalous),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn is_anomalous(self) -> bool {
        self == Label::Anomalous
    }
}

/// Recording condition of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Source,
    Target,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Source => "source",
            Domain::Target => "target",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "source" => Some(Domain::Source),
            "target" => Some(Domain::Target),
            _ => None,
        }
    }
}

/// One stream element: an embedding plus its metadata.
///
/// `label` is ground truth. The engine never reads it directly; labels reach
/// the engine only through an [`Oracle`](crate::engine::Oracle).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub machine: String,
    pub domain: Domain,
    pub label: Label,
    pub embedding: Embedding,
}

/// Cosine similarity `<a, b> / (|a| |b|)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &Embedding, b: &Embedding) -> Result<f64> {
    a.check_dim(b.dim()).map_err(|_| Error::DimensionMismatch {
        expected: a.dim(),
        found: b.dim(),
    })?;
    Ok(cosine_unchecked(a, b))
}

#[inline]
pub(crate) fn cosine_unchecked(a: &Embedding, b: &Embedding) -> f64 {
    // sqrt of the product keeps cos(e, e) == 1 exactly
    let c = math::dot(&a.values, &b.values) / math::sqrt(a.sq_norm * b.sq_norm);
    c.clamp(-1.0, 1.0)
}
