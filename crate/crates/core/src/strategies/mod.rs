//! Query-decision policies and the spent-budget tracker they share.

mod budget;
mod hybrid;
mod qbc;
mod random;

use core::fmt;
use core::str::FromStr;

pub use budget::BudgetTracker;
pub use hybrid::{HybridState, MixingRule};
pub use qbc::{qbc_uncertainty, CommitteeUpdate, QbcParams, QbcState};
pub use random::RandomState;

use crate::error::{invalid, Error, Result};
use crate::types::{Embedding, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum StrategyKind {
    /// Never queries; the offline baseline.
    Never,
    Hybrid,
    Random,
    Qbc,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Never => "never",
            StrategyKind::Hybrid => "hybrid",
            StrategyKind::Random => "random",
            StrategyKind::Qbc => "qbc",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "never" => Ok(StrategyKind::Never),
            "hybrid" => Ok(StrategyKind::Hybrid),
            "random" => Ok(StrategyKind::Random),
            "qbc" => Ok(StrategyKind::Qbc),
            other => Err(invalid(alloc::format!("unknown strategy `{other}`"))),
        }
    }
}

/// Strategy descriptor plus every hyperparameter any strategy reads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub budget: f64,
    pub window: usize,
    pub alpha: f64,
    pub mixing: MixingRule,
    pub qbc: QbcParams,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            kind: StrategyKind::Hybrid,
            budget: 0.1,
            window: 200,
            alpha: 0.01,
            mixing: MixingRule::Adaptive,
            qbc: QbcParams::default(),
        }
    }
}

/// A running query strategy. One instance per trial.
#[derive(Debug, Clone)]
pub enum Strategy {
    Never,
    Hybrid(HybridState),
    Random(RandomState),
    Qbc(QbcState),
}

impl Strategy {
    /// Builds the strategy named by `cfg`. `threshold` seeds the hybrid
    /// labeling threshold; `labeled_normals` seeds the QBC committee.
    pub fn build(
        cfg: &StrategyConfig,
        threshold: f64,
        labeled_normals: &[Embedding],
        seed: u64,
    ) -> Result<Self> {
        let tracker = || BudgetTracker::new(cfg.budget, cfg.window);
        Ok(match cfg.kind {
            StrategyKind::Never => Strategy::Never,
            StrategyKind::Hybrid => Strategy::Hybrid(HybridState::new(
                threshold, cfg.alpha, tracker()?, cfg.mixing, seed,
            )?),
            StrategyKind::Random => Strategy::Random(RandomState::new(tracker()?, seed)),
            StrategyKind::Qbc => {
                Strategy::Qbc(QbcState::new(labeled_normals, cfg.qbc, tracker()?, seed)?)
            }
        })
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            Strategy::Never => StrategyKind::Never,
            Strategy::Hybrid(_) => StrategyKind::Hybrid,
            Strategy::Random(_) => StrategyKind::Random,
            Strategy::Qbc(_) => StrategyKind::Qbc,
        }
    }

    /// Decides whether the sample with this score and embedding is queried.
    pub fn decide(&mut self, score: f64, embedding: &Embedding) -> Result<bool> {
        match self {
            Strategy::Never => Ok(false),
            Strategy::Hybrid(s) => Ok(s.decide(score)),
            Strategy::Random(s) => Ok(s.decide()),
            Strategy::Qbc(s) => s.decide(embedding).map(|(q, _)| q),
        }
    }

    /// Feeds back an oracle label for a queried sample.
    pub fn observe_label(&mut self, embedding: &Embedding, label: Label) -> Result<()> {
        match (self, label) {
            (Strategy::Qbc(s), Label::Normal) => s.update_committee(embedding),
            _ => Ok(()),
        }
    }

    pub fn tracker(&self) -> Option<&BudgetTracker> {
        match self {
            Strategy::Never => None,
            Strategy::Hybrid(s) => Some(s.tracker()),
            Strategy::Random(s) => Some(s.tracker()),
            Strategy::Qbc(s) => Some(s.tracker()),
        }
    }

    pub fn threshold(&self) -> Option<f64> {
        match self {
            Strategy::Hybrid(s) => Some(s.threshold()),
            _ => None,
        }
    }
}
