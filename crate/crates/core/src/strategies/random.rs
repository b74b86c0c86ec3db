use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::BudgetTracker;

/// Queries each sample independently with probability equal to the budget.
#[derive(Debug, Clone)]
pub struct RandomState {
    tracker: BudgetTracker,
    rng: ChaCha8Rng,
}

impl RandomState {
    pub fn new(tracker: BudgetTracker, seed: u64) -> Self {
        Self {
            tracker,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn tracker(&self) -> &BudgetTracker {
        &self.tracker
    }

    pub fn decide(&mut self) -> bool {
        let u: f64 = self.rng.random();
        let queried = u < self.tracker.budget();
        self.tracker.update(queried);
        queried
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(budget: f64, n: usize, seed: u64) -> usize {
        let mut s = RandomState::new(BudgetTracker::new(budget, 200).unwrap(), seed);
        (0..n).filter(|_| s.decide()).count()
    }

    #[test]
    fn extreme_budgets() {
        assert_eq!(run(0.0, 1000, 1), 0);
        assert_eq!(run(1.0, 1000, 1), 1000);
    }

    #[test]
    fn query_rate_matches_budget() {
        let n = 100_000;
        let frac = run(0.1, n, 42) as f64 / n as f64;
        assert!((frac - 0.1).abs() <= 0.005, "{frac}");
    }
}
