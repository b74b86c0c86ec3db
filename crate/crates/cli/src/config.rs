//! Experiment configuration (TOML), with CLI flags layered on top.

use std::path::{Path, PathBuf};

use asdal_core::engine::EngineConfig;
use asdal_core::reference::KMeansConfig;
use asdal_core::scoring::ScorerConfig;
use asdal_core::strategies::{CommitteeUpdate, MixingRule, QbcParams, StrategyConfig, StrategyKind};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    pub out: PathBuf,
    pub strategies: Vec<StrategyKind>,
    pub budgets: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub gamma: f64,
    pub alpha: f64,
    pub window: usize,
    /// Fixed mixing threshold for the hybrid strategy; adaptive when unset.
    pub upsilon: Option<f64>,
    pub committee_size: usize,
    pub inclusion_rate: f64,
    pub qbc_window: usize,
    pub qbc_rebuild: bool,
    pub initial_quantile: f64,
    pub decision_threshold: Option<f64>,
    pub kmeans_k: usize,
    pub kmeans_max_iterations: usize,
    pub kmeans_tolerance: f64,
    /// Use only the first N target-domain training normals as references.
    pub target_references: Option<usize>,
    pub max_fpr: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            train: PathBuf::from("data/train.csv"),
            test: PathBuf::from("data/test.csv"),
            out: PathBuf::from("results"),
            strategies: vec![StrategyKind::Hybrid, StrategyKind::Random, StrategyKind::Qbc],
            budgets: vec![0.0, 0.1, 0.2, 0.3],
            trials: 10,
            seed: 0,
            gamma: 0.5,
            alpha: 0.01,
            window: 200,
            upsilon: None,
            committee_size: 10,
            inclusion_rate: 0.9,
            qbc_window: 200,
            qbc_rebuild: false,
            initial_quantile: 0.9,
            decision_threshold: None,
            kmeans_k: 32,
            kmeans_max_iterations: 100,
            kmeans_tolerance: 1e-6,
            target_references: None,
            max_fpr: 0.1,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.into(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.into(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Usage(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.strategies.is_empty() {
            return bad("at least one strategy is required");
        }
        if self.budgets.is_empty() || self.budgets.iter().any(|b| !(0.0..1.0).contains(b)) {
            return bad("budgets must be non-empty and lie in [0, 1)");
        }
        if !(self.max_fpr > 0.0 && self.max_fpr <= 1.0) {
            return bad("max_fpr must lie in (0, 1]");
        }
        self.engine_config(StrategyKind::Hybrid, 0.1, 0)
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        self.kmeans_config(0)
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let strategy = self.strategy_config(StrategyKind::Qbc, 0.1);
        strategy
            .qbc
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if self.window == 0 {
            return bad("window must be positive");
        }
        if let Some(u) = self.upsilon {
            if !(0.0..1.0).contains(&u) {
                return bad("upsilon must lie in [0, 1)");
            }
        }
        Ok(())
    }

    pub fn strategy_config(&self, kind: StrategyKind, budget: f64) -> StrategyConfig {
        StrategyConfig {
            kind,
            budget,
            window: self.window,
            alpha: self.alpha,
            mixing: match self.upsilon {
                Some(upsilon) => MixingRule::Fixed { upsilon },
                None => MixingRule::Adaptive,
            },
            qbc: QbcParams {
                committee_size: self.committee_size,
                inclusion_rate: self.inclusion_rate,
                quantile_window: self.qbc_window,
                update: if self.qbc_rebuild {
                    CommitteeUpdate::Rebuild
                } else {
                    CommitteeUpdate::Incremental
                },
            },
        }
    }

    pub fn engine_config(&self, kind: StrategyKind, budget: f64, seed: u64) -> EngineConfig {
        EngineConfig {
            scorer: ScorerConfig { gamma: self.gamma },
            strategy: self.strategy_config(kind, budget),
            initial_quantile: self.initial_quantile,
            decision_threshold: self.decision_threshold,
            seed,
        }
    }

    pub fn kmeans_config(&self, seed: u64) -> KMeansConfig {
        KMeansConfig {
            k: self.kmeans_k,
            max_iterations: self.kmeans_max_iterations,
            tolerance: self.kmeans_tolerance,
            seed,
        }
    }
}
