//! Small statistics shared by the engine, the strategies and the metrics.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::sqrt;

/// Linear-interpolation empirical quantile.
///
/// For sorted `v[0..n]` and position `p = q * (n - 1)`, returns
/// `v[floor(p)] + (p - floor(p)) * (v[ceil(p)] - v[floor(p)])`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid("quantile level must lie in [0, 1]"));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, q))
}

pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = libm::ceil(pos) as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Arithmetic mean, accumulated as offsets from the first value so that a
/// constant input returns that constant exactly.
pub fn mean(values: &[f64]) -> Option<f64> {
    let first = *values.first()?;
    let offset = values.iter().map(|v| v - first).sum::<f64>() / values.len() as f64;
    Some(first + offset)
}

/// `n / sum(1 / x_i)`; every value must be strictly positive.
pub fn harmonic_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut inv = 0.0;
    for &v in values {
        if !(v > 0.0) {
            return Err(Error::NonPositive(v));
        }
        inv += 1.0 / v;
    }
    Ok(values.len() as f64 / inv)
}

/// Mean and 95% confidence half-width (normal approximation,
/// `1.96 * sd / sqrt(n)` with the sample standard deviation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub mean: f64,
    /// Absent for fewer than two values.
    pub half_width: Option<f64>,
}

pub fn ci95(values: &[f64]) -> Result<Interval> {
    let mean = mean(values).ok_or(Error::EmptyInput)?;
    let n = values.len();
    let half_width = (n >= 2).then(|| {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        1.96 * sqrt(var) / sqrt(n as f64)
    });
    Ok(Interval { mean, half_width })
}
