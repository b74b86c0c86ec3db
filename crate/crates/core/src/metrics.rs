//! Threshold-free detection metrics over trial logs.
//!
//! AUC is the Mann-Whitney pair statistic (ties count one half). The partial
//! AUC integrates the ROC curve over false-positive rates in `[0, p]` and is
//! McClish-standardized so that a random ranking maps to 0.5 and a perfect
//! one to 1.0.

use alloc::vec::Vec;

use crate::engine::TrialLog;
use crate::error::{invalid, Error, Result};
use crate::types::{Domain, Label};

pub use crate::stats::{ci95, harmonic_mean, Interval};

/// Default upper false-positive rate for the partial AUC.
pub const DEFAULT_MAX_FPR: f64 = 0.1;

fn check(anomaly_scores: &[f64], normal_scores: &[f64]) -> Result<()> {
    if anomaly_scores.is_empty() || normal_scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    if anomaly_scores.iter().chain(normal_scores).any(|s| !s.is_finite()) {
        return Err(invalid("scores must be finite"));
    }
    Ok(())
}

/// Fraction of (anomaly, normal) pairs ranked correctly; ties count 0.5.
pub fn auc(anomaly_scores: &[f64], normal_scores: &[f64]) -> Result<f64> {
    check(anomaly_scores, normal_scores)?;
    let mut normals = normal_scores.to_vec();
    normals.sort_by(f64::total_cmp);
    // twice the pair count, so ties stay integral
    let twice: u64 = anomaly_scores
        .iter()
        .map(|&a| {
            let below = normals.partition_point(|&n| n < a);
            let not_above = normals.partition_point(|&n| n <= a);
            (2 * below + (not_above - below)) as u64
        })
        .sum();
    Ok(twice as f64 / (2 * anomaly_scores.len() * normals.len()) as f64)
}

/// ROC vertices `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, sweeping the
/// threshold downward. Tied scores move both rates in one diagonal step.
pub fn roc_curve(anomaly_scores: &[f64], normal_scores: &[f64]) -> Result<Vec<(f64, f64)>> {
    check(anomaly_scores, normal_scores)?;
    let mut all: Vec<(f64, bool)> = anomaly_scores
        .iter()
        .map(|&s| (s, true))
        .chain(normal_scores.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));

    let (pos, neg) = (anomaly_scores.len() as f64, normal_scores.len() as f64);
    let mut curve = Vec::with_capacity(all.len() + 1);
    curve.push((0.0, 0.0));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < all.len() {
        let s = all[i].0;
        while i < all.len() && all[i].0 == s {
            if all[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        curve.push((fp as f64 / neg, tp as f64 / pos));
    }
    Ok(curve)
}

/// Trapezoidal area under a ROC curve for `fpr` in `[0, max_fpr]`.
pub fn partial_area(curve: &[(f64, f64)], max_fpr: f64) -> f64 {
    let mut area = 0.0;
    for w in curve.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x0 >= max_fpr {
            break;
        }
        if x1 <= max_fpr {
            area += (x1 - x0) * (y0 + y1) / 2.0;
        } else {
            let y = y0 + (y1 - y0) * (max_fpr - x0) / (x1 - x0);
            area += (max_fpr - x0) * (y0 + y) / 2.0;
        }
    }
    area
}

/// Unstandardized partial area under the ROC curve for FPR in `[0, max_fpr]`.
pub fn pauc_raw(anomaly_scores: &[f64], normal_scores: &[f64], max_fpr: f64) -> Result<f64> {
    if !(max_fpr > 0.0 && max_fpr <= 1.0) {
        return Err(invalid("max_fpr must lie in (0, 1]"));
    }
    let curve = roc_curve(anomaly_scores, normal_scores)?;
    Ok(partial_area(&curve, max_fpr))
}

/// McClish-standardized partial AUC.
pub fn pauc(anomaly_scores: &[f64], normal_scores: &[f64], max_fpr: f64) -> Result<f64> {
    let raw = pauc_raw(anomaly_scores, normal_scores, max_fpr)?;
    Ok(standardize_partial_area(raw, max_fpr))
}

pub fn standardize_partial_area(raw: f64, max_fpr: f64) -> f64 {
    let min_area = max_fpr * max_fpr / 2.0;
    0.5 * (1.0 + (raw - min_area) / (max_fpr - min_area))
}

/// Anomaly scores and normal scores for one evaluation split.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreSplit {
    pub anomalies: Vec<f64>,
    pub normals: Vec<f64>,
}

impl ScoreSplit {
    fn into_option(self) -> Option<Self> {
        (!self.anomalies.is_empty() && !self.normals.is_empty()).then_some(self)
    }
}

/// Source, target and mixed splits. Each domain split pairs that domain's
/// normals with the anomalies of both domains. A split without normals or
/// without anomalies is `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DomainSplits {
    pub source: Option<ScoreSplit>,
    pub target: Option<ScoreSplit>,
    pub mixed: Option<ScoreSplit>,
}

pub fn split_by_domain(log: &TrialLog) -> Result<DomainSplits> {
    if log.records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let anomalies: Vec<f64> = log
        .records
        .iter()
        .filter(|r| r.truth_label == Label::Anomalous)
        .map(|r| r.score)
        .collect();
    let normals = |domain: Option<Domain>| -> Vec<f64> {
        log.records
            .iter()
            .filter(|r| r.truth_label == Label::Normal && domain.is_none_or(|d| r.domain == d))
            .map(|r| r.score)
            .collect()
    };
    let split = |domain| {
        ScoreSplit {
            anomalies: anomalies.clone(),
            normals: normals(domain),
        }
        .into_option()
    };
    Ok(DomainSplits {
        source: split(Some(Domain::Source)),
        target: split(Some(Domain::Target)),
        mixed: split(None),
    })
}

/// AUC and standardized pAUC for each split; `None` where a split is absent.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DomainMetrics {
    pub auc_source: Option<f64>,
    pub auc_target: Option<f64>,
    pub auc_mixed: Option<f64>,
    pub pauc_source: Option<f64>,
    pub pauc_target: Option<f64>,
    pub pauc_mixed: Option<f64>,
}

pub fn evaluate_log(log: &TrialLog, max_fpr: f64) -> Result<DomainMetrics> {
    let splits = split_by_domain(log)?;
    let a = |s: &Option<ScoreSplit>| s.as_ref().map(|s| auc(&s.anomalies, &s.normals)).transpose();
    let p = |s: &Option<ScoreSplit>| {
        s.as_ref()
            .map(|s| pauc(&s.anomalies, &s.normals, max_fpr))
            .transpose()
    };
    Ok(DomainMetrics {
        auc_source: a(&splits.source)?,
        auc_target: a(&splits.target)?,
        auc_mixed: a(&splits.mixed)?,
        pauc_source: p(&splits.source)?,
        pauc_target: p(&splits.target)?,
        pauc_mixed: p(&splits.mixed)?,
    })
}
