//! The prequential active-learning loop.
//!
//! For every arriving sample the engine computes the augmented score, asks
//! the strategy whether to query, and on a query fetches the label from the
//! [`Oracle`] and appends the embedding to the matching reference set. A
//! newly labeled normal also contributes its base score to the score pool.
//! The score in each [`DecisionRecord`] is taken before any of those updates.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::scoring::{augmented_score, base_score, ReferenceSets, ScorerConfig};
use crate::strategies::{Strategy, StrategyConfig, StrategyKind};
use crate::types::{Domain, Embedding, Label, Sample};

pub use crate::stats::quantile;

/// Fallback labeling threshold when every labeled normal scores exactly 0.
pub const MIN_THRESHOLD: f64 = 1e-6;

/// Source of ground-truth labels for queried samples.
pub trait Oracle {
    fn label(&mut self, sample_id: &str) -> Result<Label>;
}

impl<F> Oracle for F
where
    F: FnMut(&str) -> Result<Label>,
{
    fn label(&mut self, sample_id: &str) -> Result<Label> {
        self(sample_id)
    }
}

/// Answers from a stored id-to-label table, typically the dataset's ground truth.
#[derive(Debug, Clone, Default)]
pub struct TableOracle {
    labels: BTreeMap<String, Label>,
    queries: usize,
}

impl TableOracle {
    pub fn from_samples<'a>(samples: impl IntoIterator<Item = &'a Sample>) -> Self {
        let labels = samples
            .into_iter()
            .map(|s| (s.id.clone(), s.label))
            .collect();
        Self { labels, queries: 0 }
    }

    pub fn queries(&self) -> usize {
        self.queries
    }
}

impl Oracle for TableOracle {
    fn label(&mut self, sample_id: &str) -> Result<Label> {
        self.queries += 1;
        self.labels.get(sample_id).copied().ok_or_else(|| Error::Oracle {
            id: sample_id.into(),
            reason: "unknown sample id".into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub scorer: ScorerConfig,
    pub strategy: StrategyConfig,
    /// Quantile of the labeled-normal scores used as the initial threshold.
    pub initial_quantile: f64,
    /// Operator decision threshold. Reported only; never gates behavior.
    pub decision_threshold: Option<f64>,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            scorer: ScorerConfig::default(),
            strategy: StrategyConfig::default(),
            initial_quantile: 0.9,
            decision_threshold: None,
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        self.scorer.validate()?;
        if !(self.initial_quantile > 0.0 && self.initial_quantile < 1.0) {
            return Err(invalid("initial_quantile must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRecord {
    pub sample_id: String,
    pub arrival_index: usize,
    /// Augmented score at arrival, before this sample caused any update.
    pub score: f64,
    pub queried: bool,
    /// Present iff `queried`.
    pub oracle_label: Option<Label>,
    /// Ground truth, kept for evaluation only.
    pub truth_label: Label,
    pub domain: Domain,
    pub machine: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialLog {
    pub records: Vec<DecisionRecord>,
    pub initial_sizes: (usize, usize),
    pub final_sizes: (usize, usize),
    pub query_fraction: f64,
    pub seed: u64,
    pub decision_threshold: Option<f64>,
}

impl TrialLog {
    pub fn queried_count(&self) -> usize {
        self.records.iter().filter(|r| r.queried).count()
    }
}

/// Labeling threshold from labeled-normal scores: the requested quantile,
/// replaced by the smallest positive score (or [`MIN_THRESHOLD`]) when it is 0.
pub fn initial_threshold(scores: &[f64], q: f64) -> Result<f64> {
    let h = quantile(scores, q)?;
    if h > 0.0 {
        return Ok(h);
    }
    Ok(scores
        .iter()
        .copied()
        .filter(|&s| s > 0.0)
        .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.min(s))))
        .unwrap_or(MIN_THRESHOLD))
}

#[derive(Debug, Clone)]
pub struct Engine {
    refs: ReferenceSets,
    scorer: ScorerConfig,
    strategy: Strategy,
    score_pool: Vec<f64>,
    initial_threshold: f64,
    initial_sizes: (usize, usize),
    decision_threshold: Option<f64>,
    seed: u64,
    arrivals: usize,
}

impl Engine {
    /// Scores the labeled normals against `refs`, derives the initial
    /// threshold and builds the strategy.
    pub fn initialize(
        refs: ReferenceSets,
        labeled_normals: &[Embedding],
        cfg: &EngineConfig,
    ) -> Result<Self> {
        if labeled_normals.is_empty() {
            return Err(Error::EmptyInput);
        }
        let scores = labeled_normals
            .iter()
            .map(|e| base_score(e, &refs))
            .collect::<Result<Vec<_>>>()?;
        Self::with_score_pool(refs, scores, cfg)
    }

    /// Like [`Engine::initialize`] but with precomputed labeled-normal scores.
    pub fn with_score_pool(refs: ReferenceSets, scores: Vec<f64>, cfg: &EngineConfig) -> Result<Self> {
        cfg.validate()?;
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(invalid("score pool contains non-finite values"));
        }
        let h = initial_threshold(&scores, cfg.initial_quantile)?;
        let strategy = Strategy::build(&cfg.strategy, h, refs.normal(), cfg.seed)?;
        Ok(Self {
            initial_sizes: refs.sizes(),
            refs,
            scorer: cfg.scorer,
            strategy,
            score_pool: scores,
            initial_threshold: h,
            decision_threshold: cfg.decision_threshold,
            seed: cfg.seed,
            arrivals: 0,
        })
    }

    pub fn refs(&self) -> &ReferenceSets {
        &self.refs
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn strategy_kind(&self) -> StrategyKind {
        self.strategy.kind()
    }

    pub fn score_pool(&self) -> &[f64] {
        &self.score_pool
    }

    pub fn initial_threshold(&self) -> f64 {
        self.initial_threshold
    }

    /// Current score of `e` without touching any state.
    pub fn score(&self, e: &Embedding) -> Result<f64> {
        augmented_score(e, &self.refs, &self.scorer)
    }

    /// Test-then-train step for one sample.
    pub fn process_sample<O: Oracle + ?Sized>(
        &mut self,
        sample: &Sample,
        oracle: &mut O,
    ) -> Result<DecisionRecord> {
        let e = &sample.embedding;
        let base = base_score(e, &self.refs)?;
        let score = if self.refs.anomalous().is_empty() {
            base
        } else {
            augmented_score(e, &self.refs, &self.scorer)?
        };

        let queried = self.strategy.decide(score, e)?;
        let oracle_label = if queried {
            let label = oracle.label(&sample.id)?;
            self.refs.add_member(e.clone(), label)?;
            if label == Label::Normal {
                self.score_pool.push(base);
            }
            self.strategy.observe_label(e, label)?;
            Some(label)
        } else {
            None
        };

        let record = DecisionRecord {
            sample_id: sample.id.clone(),
            arrival_index: self.arrivals,
            score,
            queried,
            oracle_label,
            truth_label: sample.label,
            domain: sample.domain,
            machine: sample.machine.clone(),
        };
        self.arrivals += 1;
        Ok(record)
    }

    /// Runs the whole stream in order and returns the trial log.
    pub fn run_stream<O: Oracle + ?Sized>(
        &mut self,
        samples: &[Sample],
        oracle: &mut O,
    ) -> Result<TrialLog> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        let records = samples
            .iter()
            .map(|s| self.process_sample(s, oracle))
            .collect::<Result<Vec<_>>>()?;
        let queried = records.iter().filter(|r| r.queried).count();
        Ok(TrialLog {
            query_fraction: queried as f64 / records.len() as f64,
            records,
            initial_sizes: self.initial_sizes,
            final_sizes: self.refs.sizes(),
            seed: self.seed,
            decision_threshold: self.decision_threshold,
        })
    }
}
