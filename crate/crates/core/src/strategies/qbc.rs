//! Query-by-committee baseline.
//!
//! Each committee member scores a sample by cosine distance to its own
//! subsample of the labeled normals; uncertainty is the mean absolute
//! deviation of the member scores. Query volume is controlled by a balancing
//! incremental quantile filter: a sliding window of recent uncertainties
//! provides the `(1 - budget)` quantile gate, and a balance account accrues
//! `budget` per sample and pays 1 per query, so a query is only allowed when
//! the balance is at least 1.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::BudgetTracker;
use crate::error::{invalid, Error, Result};
use crate::scoring::{base_score, ReferenceSets};
use crate::stats::quantile_sorted;
use crate::types::Embedding;

/// How committee members absorb newly labeled normals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommitteeUpdate {
    /// Append the new normal to each member independently with probability
    /// `inclusion_rate`.
    #[default]
    Incremental,
    /// Resample every member from the full labeled pool after each label.
    Rebuild,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbcParams {
    pub committee_size: usize,
    pub inclusion_rate: f64,
    pub quantile_window: usize,
    pub update: CommitteeUpdate,
}

impl Default for QbcParams {
    fn default() -> Self {
        Self {
            committee_size: 10,
            inclusion_rate: 0.9,
            quantile_window: 200,
            update: CommitteeUpdate::Incremental,
        }
    }
}

impl QbcParams {
    pub fn validate(&self) -> Result<()> {
        if self.committee_size < 2 {
            return Err(Error::CommitteeTooSmall(self.committee_size));
        }
        if !(0.0..=1.0).contains(&self.inclusion_rate) {
            return Err(invalid("inclusion_rate must lie in [0, 1]"));
        }
        if self.quantile_window == 0 {
            return Err(invalid("quantile window must be positive"));
        }
        Ok(())
    }
}

/// Mean absolute deviation of committee scores from their mean.
pub fn qbc_uncertainty(member_scores: &[f64]) -> Result<f64> {
    let n = member_scores.len();
    if n < 2 {
        return Err(Error::CommitteeTooSmall(n));
    }
    let mean = crate::stats::mean(member_scores).expect("non-empty");
    Ok(member_scores.iter().map(|s| (s - mean).abs()).sum::<f64>() / n as f64)
}

#[derive(Debug, Clone)]
pub struct QbcState {
    params: QbcParams,
    members: Vec<ReferenceSets>,
    pool: Vec<Embedding>,
    window: VecDeque<f64>,
    balance: f64,
    tracker: BudgetTracker,
    rng: ChaCha8Rng,
    last_uncertainty: Option<f64>,
}

impl QbcState {
    /// Builds a committee whose members each keep every pooled normal with
    /// probability `inclusion_rate` (at least one member each).
    pub fn new(
        labeled_normals: &[Embedding],
        params: QbcParams,
        tracker: BudgetTracker,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        if labeled_normals.is_empty() {
            return Err(Error::EmptyNormalSet);
        }
        let mut state = Self {
            params,
            members: Vec::new(),
            pool: labeled_normals.to_vec(),
            window: VecDeque::with_capacity(params.quantile_window),
            balance: 0.0,
            tracker,
            rng: ChaCha8Rng::seed_from_u64(seed),
            last_uncertainty: None,
        };
        state.rebuild()?;
        Ok(state)
    }

    fn rebuild(&mut self) -> Result<()> {
        let mut members = Vec::with_capacity(self.params.committee_size);
        for _ in 0..self.params.committee_size {
            let mut set: Vec<Embedding> = self
                .pool
                .iter()
                .filter(|_| self.rng.random::<f64>() < self.params.inclusion_rate)
                .cloned()
                .collect();
            if set.is_empty() {
                let i = self.rng.random_range(0..self.pool.len());
                set.push(self.pool[i].clone());
            }
            members.push(ReferenceSets::with_normals(set)?);
        }
        self.members = members;
        Ok(())
    }

    pub fn members(&self) -> &[ReferenceSets] {
        &self.members
    }

    pub fn balance(&self) -> f64 {
        self.balance
    }

    pub fn tracker(&self) -> &BudgetTracker {
        &self.tracker
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn last_uncertainty(&self) -> Option<f64> {
        self.last_uncertainty
    }

    /// Scores `e` with every member and applies the quantile filter.
    /// Returns the decision and the committee uncertainty.
    pub fn decide(&mut self, e: &Embedding) -> Result<(bool, f64)> {
        let scores = self
            .members
            .iter()
            .map(|m| base_score(e, m))
            .collect::<Result<Vec<_>>>()?;
        let u = qbc_uncertainty(&scores)?;

        if self.window.len() == self.params.quantile_window {
            self.window.pop_front();
        }
        self.window.push_back(u);

        let budget = self.tracker.budget();
        self.balance += budget;
        let queried = self.balance >= 1.0 && {
            let mut sorted: Vec<f64> = self.window.iter().copied().collect();
            sorted.sort_by(f64::total_cmp);
            u >= quantile_sorted(&sorted, 1.0 - budget)
        };
        if queried {
            self.balance -= 1.0;
        }
        self.tracker.update(queried);
        self.last_uncertainty = Some(u);
        Ok((queried, u))
    }

    /// Folds a newly labeled normal into the committee.
    pub fn update_committee(&mut self, e: &Embedding) -> Result<()> {
        match self.params.update {
            CommitteeUpdate::Incremental => {
                for m in &mut self.members {
                    if self.rng.random::<f64>() < self.params.inclusion_rate {
                        m.add_member(e.clone(), crate::types::Label::Normal)?;
                    }
                }
                Ok(())
            }
            CommitteeUpdate::Rebuild => {
                self.pool.push(e.clone());
                self.rebuild()
            }
        }
    }
}
