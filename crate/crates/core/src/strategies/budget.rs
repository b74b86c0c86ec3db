use crate::error::{invalid, Result};

/// Moving-average estimate of the fraction of samples queried so far.
///
/// After every decision, queried or not,
/// `spent <- ((window - 1) * spent + queried) / window`.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetTracker {
    budget: f64,
    spent: f64,
    window: usize,
}

impl BudgetTracker {
    pub fn new(budget: f64, window: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&budget) {
            return Err(invalid("budget must lie in [0, 1]"));
        }
        if window == 0 {
            return Err(invalid("budget window must be positive"));
        }
        Ok(Self {
            budget,
            spent: 0.0,
            window,
        })
    }

    /// Starts from an arbitrary spent estimate; mostly useful in tests.
    pub fn with_spent(mut self, spent: f64) -> Self {
        self.spent = spent.clamp(0.0, 1.0);
        self
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn has_budget(&self) -> bool {
        self.spent < self.budget
    }

    pub fn update(&mut self, queried: bool) {
        let w = self.window as f64;
        let lambda = if queried { 1.0 } else { 0.0 };
        self.spent = ((w - 1.0) * self.spent + lambda) / w;
    }
}
