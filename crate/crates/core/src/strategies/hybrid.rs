//! Hybrid least-certainty / random query decision with an adaptive
//! labeling threshold.
//!
//! While the spent budget is below the target, a sample whose score exceeds
//! the threshold is always queried; any other sample is queried when a fresh
//! uniform draw exceeds `spent / budget`, and the threshold is raised by
//! `(1 + alpha)`. Once the budget is spent the threshold is lowered by
//! `(1 - alpha)` and nothing is queried.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::BudgetTracker;
use crate::error::{invalid, Result};

/// How the non-certainty branch mixes in random sampling.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MixingRule {
    /// Query below-threshold samples when `eta > spent / budget`.
    #[default]
    Adaptive,
    /// Draw `eta`; if `eta > upsilon` query iff the score exceeds the
    /// threshold, otherwise query with probability `budget`.
    Fixed { upsilon: f64 },
}

#[derive(Debug, Clone)]
pub struct HybridState {
    threshold: f64,
    alpha: f64,
    tracker: BudgetTracker,
    mixing: MixingRule,
    rng: ChaCha8Rng,
}

impl HybridState {
    pub fn new(
        threshold: f64,
        alpha: f64,
        tracker: BudgetTracker,
        mixing: MixingRule,
        seed: u64,
    ) -> Result<Self> {
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(invalid("labeling threshold must be positive"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid("alpha must lie in (0, 1)"));
        }
        if let MixingRule::Fixed { upsilon } = mixing {
            if !(0.0..1.0).contains(&upsilon) {
                return Err(invalid("upsilon must lie in [0, 1)"));
            }
        }
        Ok(Self {
            threshold,
            alpha,
            tracker,
            mixing,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn tracker(&self) -> &BudgetTracker {
        &self.tracker
    }

    /// Decides whether to query a sample with anomaly score `score`.
    pub fn decide(&mut self, score: f64) -> bool {
        let queried = if self.tracker.has_budget() {
            let q = match self.mixing {
                MixingRule::Adaptive => {
                    score > self.threshold || {
                        let eta: f64 = self.rng.random();
                        eta > self.tracker.spent() / self.tracker.budget()
                    }
                }
                MixingRule::Fixed { upsilon } => {
                    let eta: f64 = self.rng.random();
                    if eta > upsilon {
                        score > self.threshold
                    } else {
                        self.rng.random::<f64>() < self.tracker.budget()
                    }
                }
            };
            self.threshold *= 1.0 + self.alpha;
            q
        } else {
            self.threshold *= 1.0 - self.alpha;
            false
        };
        self.tracker.update(queried);
        queried
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(budget: f64, spent: f64, threshold: f64) -> HybridState {
        let tracker = BudgetTracker::new(budget, 200).unwrap().with_spent(spent);
        HybridState::new(threshold, 0.01, tracker, MixingRule::Adaptive, 7).unwrap()
    }

    #[test]
    fn above_threshold_with_budget_queries_and_raises_threshold() {
        let mut s = state(0.1, 0.05, 0.3);
        assert!(s.decide(0.5));
        assert!((s.threshold() - 0.3 * 1.01).abs() < 1e-15);
    }

    #[test]
    fn exhausted_budget_never_queries_and_lowers_threshold() {
        let mut s = state(0.1, 0.1, 0.3);
        assert!(!s.decide(10.0));
        assert!((s.threshold() - 0.3 * 0.99).abs() < 1e-15);
    }

    #[test]
    fn fresh_start_queries_below_threshold() {
        let mut hits = 0;
        for seed in 0..10_000u64 {
            let tracker = BudgetTracker::new(0.1, 200).unwrap();
            let mut s = HybridState::new(1.0, 0.01, tracker, MixingRule::Adaptive, seed).unwrap();
            if s.decide(0.0) {
                hits += 1;
            }
        }
        assert_eq!(hits, 10_000);
    }

    #[test]
    fn zero_budget_never_queries() {
        let mut s = state(0.0, 0.0, 0.3);
        for i in 0..100 {
            assert!(!s.decide(i as f64));
        }
        assert!(s.threshold() > 0.0);
    }

    #[test]
    fn fixed_mixing_with_zero_upsilon_is_pure_certainty() {
        let tracker = BudgetTracker::new(0.5, 200).unwrap();
        let mut s =
            HybridState::new(0.5, 0.01, tracker, MixingRule::Fixed { upsilon: 0.0 }, 3).unwrap();
        assert!(!s.decide(0.1));
        assert!(s.decide(0.9));
    }

    #[test]
    fn rejects_invalid_parameters() {
        let t = BudgetTracker::new(0.1, 200).unwrap();
        assert!(HybridState::new(0.0, 0.01, t.clone(), MixingRule::Adaptive, 0).is_err());
        assert!(HybridState::new(0.1, 1.0, t.clone(), MixingRule::Adaptive, 0).is_err());
        assert!(HybridState::new(0.1, 0.01, t, MixingRule::Fixed { upsilon: 1.0 }, 0).is_err());
    }

    proptest! {
        #[test]
        fn query_count_respects_window_bound(
            budget in 0.01f64..0.6,
            window in 2usize..400,
            seed in any::<u64>(),
            scores in prop::collection::vec(0.0f64..1.0, 1..1500),
        ) {
            let tracker = BudgetTracker::new(budget, window).unwrap();
            let mut s = HybridState::new(0.5, 0.01, tracker, MixingRule::Adaptive, seed).unwrap();
            let w = window as f64;
            let mut queried = 0usize;
            for &x in &scores {
                queried += s.decide(x) as usize;
                prop_assert!(s.tracker().spent() < budget + 1.0 / w + 1e-12);
            }
            let n = scores.len() as f64;
            prop_assert!(queried as f64 <= n * (budget + 1.0 / w) + w * budget + 1.0 + 1e-9);
        }
    }
}
