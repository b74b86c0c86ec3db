//! The trial grid: every (machine, strategy, budget, trial) cell is an
//! independent prequential run with its own shuffled stream and seed.

use std::collections::BTreeMap;

use asdal_core::engine::{Engine, TableOracle, TrialLog};
use asdal_core::metrics::{evaluate_log, DomainMetrics};
use asdal_core::reference::build_initial_reference;
use asdal_core::scoring::{base_score, ReferenceSets};
use asdal_core::strategies::StrategyKind;
use asdal_core::{Domain, Embedding, Label, Sample};
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::results::{sort_rows, ResultRow};
use crate::seed::{machine_seed, trial_seed};

/// Per-machine state shared by all cells: initial references, the
/// labeled-normal score pool and the test stream in file order.
#[derive(Debug, Clone)]
pub struct PreparedMachine {
    pub name: String,
    pub refs: ReferenceSets,
    pub score_pool: Vec<f64>,
    pub stream: Vec<Sample>,
}

fn group_by_machine(samples: &[Sample]) -> BTreeMap<&str, Vec<&Sample>> {
    let mut map: BTreeMap<&str, Vec<&Sample>> = BTreeMap::new();
    for s in samples {
        map.entry(s.machine.as_str()).or_default().push(s);
    }
    map
}

/// Builds reference sets and score pools for every machine in `test`.
pub fn prepare(cfg: &ExperimentConfig, train: &[Sample], test: &[Sample]) -> Result<Vec<PreparedMachine>> {
    let train_by = group_by_machine(train);
    let test_by = group_by_machine(test);
    let dims: Vec<usize> = train.iter().chain(test).map(|s| s.embedding.dim()).collect();
    if dims.windows(2).any(|w| w[0] != w[1]) {
        return Err(CliError::data(&cfg.test, "train and test embedding dimensions differ"));
    }

    test_by
        .into_iter()
        .map(|(name, stream)| {
            let rows = train_by
                .get(name)
                .ok_or_else(|| CliError::data(&cfg.train, format!("no training rows for machine `{name}`")))?;
            let normals = |d: Domain| -> Vec<Embedding> {
                rows.iter()
                    .filter(|s| s.domain == d && s.label == Label::Normal)
                    .map(|s| s.embedding.clone())
                    .collect()
            };
            let source = normals(Domain::Source);
            let mut target = normals(Domain::Target);
            if let Some(n) = cfg.target_references {
                target.truncate(n);
            }
            let kcfg = cfg.kmeans_config(machine_seed(cfg.seed, name));
            let refs = build_initial_reference(&source, &target, &kcfg)
                .map_err(|e| CliError::data(&cfg.train, format!("machine `{name}`: {e}")))?;
            let score_pool = rows
                .iter()
                .filter(|s| s.label == Label::Normal)
                .map(|s| base_score(&s.embedding, &refs))
                .collect::<asdal_core::Result<Vec<_>>>()
                .map_err(|e| CliError::data(&cfg.train, e))?;
            Ok(PreparedMachine {
                name: name.to_string(),
                refs,
                score_pool,
                stream: stream.into_iter().cloned().collect(),
            })
        })
        .collect()
}

/// One cell of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub strategy: StrategyKind,
    pub budget: f64,
    pub trial: usize,
}

/// Runs one trial and returns its log. A zero budget runs the never-query
/// strategy regardless of `cell.strategy`.
pub fn run_trial(cfg: &ExperimentConfig, machine: &PreparedMachine, cell: Cell) -> Result<(u64, TrialLog)> {
    let seed = trial_seed(cfg.seed, &machine.name, cell.strategy.as_str(), cell.budget, cell.trial);
    let fail = |source| CliError::Trial {
        machine: machine.name.clone(),
        strategy: cell.strategy.to_string(),
        budget: cell.budget,
        trial: cell.trial,
        source,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stream = machine.stream.clone();
    stream.shuffle(&mut rng);
    let engine_seed = rng.next_u64();

    let kind = if cell.budget == 0.0 {
        StrategyKind::Never
    } else {
        cell.strategy
    };
    let engine_cfg = cfg.engine_config(kind, cell.budget, engine_seed);
    let mut engine = Engine::with_score_pool(machine.refs.clone(), machine.score_pool.clone(), &engine_cfg)
        .map_err(fail)?;
    let mut oracle = TableOracle::from_samples(&machine.stream);
    let log = engine.run_stream(&stream, &mut oracle).map_err(fail)?;
    Ok((seed, log))
}

fn row(machine: &str, cell: Cell, seed: u64, log: &TrialLog, m: DomainMetrics) -> ResultRow {
    ResultRow {
        machine: machine.to_string(),
        strategy: cell.strategy.to_string(),
        budget: cell.budget,
        trial: cell.trial,
        seed,
        auc_source: m.auc_source,
        auc_target: m.auc_target,
        auc_mixed: m.auc_mixed,
        pauc_source: m.pauc_source,
        pauc_target: m.pauc_target,
        pauc_mixed: m.pauc_mixed,
        query_fraction: log.query_fraction,
        n_normal_final: log.final_sizes.0,
        n_anomalous_final: log.final_sizes.1,
    }
}

/// Runs the full grid in parallel and returns rows in canonical order.
pub fn run_experiment(cfg: &ExperimentConfig, train: &[Sample], test: &[Sample]) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let machines = prepare(cfg, train, test)?;
    let mut jobs = Vec::new();
    for machine in &machines {
        for &strategy in &cfg.strategies {
            for &budget in &cfg.budgets {
                for trial in 0..cfg.trials {
                    jobs.push((machine, Cell { strategy, budget, trial }));
                }
            }
        }
    }
    let mut rows = jobs
        .into_par_iter()
        .map(|(machine, cell)| {
            let (seed, log) = run_trial(cfg, machine, cell)?;
            let metrics = evaluate_log(&log, cfg.max_fpr).map_err(|source| CliError::Trial {
                machine: machine.name.clone(),
                strategy: cell.strategy.to_string(),
                budget: cell.budget,
                trial: cell.trial,
                source,
            })?;
            Ok(row(&machine.name, cell, seed, &log, metrics))
        })
        .collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows);
    Ok(rows)
}
