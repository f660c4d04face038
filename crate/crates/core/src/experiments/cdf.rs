//! Empirical CDFs on shared threshold grids.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint {
    pub threshold: f64,
    pub probability: f64,
    /// Binomial standard error `sqrt(F (1 - F) / n)`.
    pub stderr: f64,
}

/// `num_points` equally spaced thresholds spanning `[lo, hi]`.
pub fn thresholds(lo: f64, hi: f64, num_points: usize) -> Result<Vec<f64>> {
    if num_points == 0 {
        return Err(Error::InvalidArgument("num_points must be >= 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::InvalidArgument(format!(
            "invalid threshold range [{lo}, {hi}]"
        )));
    }
    if num_points == 1 {
        return Ok(vec![hi]);
    }
    let step = (hi - lo) / (num_points - 1) as f64;
    Ok((0..num_points)
        .map(|i| {
            if i + 1 == num_points {
                hi
            } else {
                lo + i as f64 * step
            }
        })
        .collect())
}

/// Fraction of samples `<= t` for every threshold `t`.
pub fn cdf_at(samples: &[f64], thresholds: &[f64]) -> Result<Vec<CdfPoint>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument(
            "empirical CDF of an empty sample".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&t| {
            let count = sorted.partition_point(|&x| x <= t);
            let p = count as f64 / n;
            CdfPoint {
                threshold: t,
                probability: p,
                stderr: (p * (1.0 - p) / n).sqrt(),
            }
        })
        .collect())
}

/// CDF on `num_points` thresholds spanning the sample range.
pub fn cdf_table(samples: &[f64], num_points: usize) -> Result<Vec<CdfPoint>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument(
            "empirical CDF of an empty sample".into(),
        ));
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    cdf_at(samples, &thresholds(lo, hi, num_points)?)
}
