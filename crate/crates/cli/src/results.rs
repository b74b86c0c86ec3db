//! Result rows (CSV) and the aggregated summary (JSON).

use std::cmp::Ordering;
use std::fs::File;
use std::path::Path;

use asdal_core::metrics::{ci95, harmonic_mean};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// One (machine, strategy, budget, trial) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub machine: String,
    pub strategy: String,
    pub budget: f64,
    pub trial: usize,
    pub seed: u64,
    pub auc_source: Option<f64>,
    pub auc_target: Option<f64>,
    pub auc_mixed: Option<f64>,
    pub pauc_source: Option<f64>,
    pub pauc_target: Option<f64>,
    pub pauc_mixed: Option<f64>,
    pub query_fraction: f64,
    pub n_normal_final: usize,
    pub n_anomalous_final: usize,
}

impl ResultRow {
    fn cell_order(&self, other: &Self) -> Ordering {
        self.strategy
            .cmp(&other.strategy)
            .then(self.budget.total_cmp(&other.budget))
    }
}

/// Canonical row order: machine, strategy, budget, trial.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.machine
            .cmp(&b.machine)
            .then_with(|| a.cell_order(b))
            .then(a.trial.cmp(&b.trial))
    });
}

pub fn write_rows<W: std::io::Write>(writer: W, rows: &[ResultRow]) -> std::result::Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_rows(std::io::BufWriter::new(file), rows).map_err(|e| CliError::data(path, e))
}

pub fn load_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let rows = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<ResultRow>, _>>()
        .map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::DataRow {
                path: path.into(),
                line,
                message: e.to_string(),
            }
        })?;
    if rows.is_empty() {
        return Err(CliError::data(path, "no result rows"));
    }
    Ok(rows)
}

/// Mean and 95% CI half-width of one metric over the trials where it exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub n: usize,
    pub mean: Option<f64>,
    pub ci95: Option<f64>,
}

impl Stat {
    fn of(values: impl Iterator<Item = Option<f64>>) -> Self {
        let present: Vec<f64> = values.flatten().collect();
        match ci95(&present) {
            Ok(i) => Stat {
                n: present.len(),
                mean: Some(i.mean),
                ci95: i.half_width,
            },
            Err(_) => Stat {
                n: 0,
                mean: None,
                ci95: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MachineSummary {
    pub machine: String,
    pub trials: usize,
    pub auc_source: Stat,
    pub auc_target: Stat,
    pub auc_mixed: Stat,
    pub pauc_source: Stat,
    pub pauc_target: Stat,
    pub pauc_mixed: Stat,
    pub query_fraction: Stat,
}

/// Harmonic means across machines of the per-machine mean metrics. Absent
/// when any machine lacks the metric or has a non-positive mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicMeans {
    pub auc_source: Option<f64>,
    pub auc_target: Option<f64>,
    pub auc_mixed: Option<f64>,
    pub pauc_source: Option<f64>,
    pub pauc_target: Option<f64>,
    pub pauc_mixed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub strategy: String,
    pub budget: f64,
    pub machines: Vec<MachineSummary>,
    pub harmonic_mean: HarmonicMeans,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub cells: Vec<CellSummary>,
}

fn summarize_machine(rows: &[&ResultRow]) -> MachineSummary {
    let stat = |f: fn(&ResultRow) -> Option<f64>| Stat::of(rows.iter().map(|r| f(r)));
    MachineSummary {
        machine: rows[0].machine.clone(),
        trials: rows.len(),
        auc_source: stat(|r| r.auc_source),
        auc_target: stat(|r| r.auc_target),
        auc_mixed: stat(|r| r.auc_mixed),
        pauc_source: stat(|r| r.pauc_source),
        pauc_target: stat(|r| r.pauc_target),
        pauc_mixed: stat(|r| r.pauc_mixed),
        query_fraction: stat(|r| Some(r.query_fraction)),
    }
}

fn harmonic(machines: &[MachineSummary], f: fn(&MachineSummary) -> Stat) -> Option<f64> {
    let means: Option<Vec<f64>> = machines.iter().map(|m| f(m).mean).collect();
    harmonic_mean(&means?).ok()
}

/// Aggregates rows per (strategy, budget, machine) and across machines.
pub fn summarize(rows: &[ResultRow]) -> Summary {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.cell_order(b)
            .then_with(|| a.machine.cmp(&b.machine))
            .then(a.trial.cmp(&b.trial))
    });

    let mut cells = Vec::new();
    for cell in sorted.chunk_by(|a, b| a.cell_order(b) == Ordering::Equal) {
        let machines: Vec<MachineSummary> = cell
            .chunk_by(|a, b| a.machine == b.machine)
            .map(summarize_machine)
            .collect();
        let harmonic_mean = HarmonicMeans {
            auc_source: harmonic(&machines, |m| m.auc_source),
            auc_target: harmonic(&machines, |m| m.auc_target),
            auc_mixed: harmonic(&machines, |m| m.auc_mixed),
            pauc_source: harmonic(&machines, |m| m.pauc_source),
            pauc_target: harmonic(&machines, |m| m.pauc_target),
            pauc_mixed: harmonic(&machines, |m| m.pauc_mixed),
        };
        cells.push(CellSummary {
            strategy: cell[0].strategy.clone(),
            budget: cell[0].budget,
            machines,
            harmonic_mean,
        });
    }
    Summary { cells }
}

pub fn summary_json(rows: &[ResultRow]) -> String {
    let mut s = serde_json::to_string_pretty(&summarize(rows)).expect("summary serializes");
    s.push('\n');
    s
}
