//! Zero-forcing and matched-filter beamformers on the sample-averaged
//! channel.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::BeamformerSet;
use crate::error::{Error, Result};

/// Gram eigenvalues below this fraction of the largest count as rank loss.
const RANK_TOL: f64 = 1e-12;
/// Ridge, as a fraction of `trace(H H^H)`, used when the rank is deficient.
const RIDGE_FRACTION: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ZfOutcome {
    pub beamformers: BeamformerSet,
    /// The averaged channel was rank deficient and a ridge was added.
    pub regularized: bool,
}

/// `(1/L) sum_l H^(l)`.
pub fn average_channel(channels: &[DMatrix<Complex64>]) -> Result<DMatrix<Complex64>> {
    let first = channels
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty sample set".into()))?;
    let mut acc = DMatrix::<Complex64>::zeros(first.nrows(), first.ncols());
    for h in channels {
        if h.shape() != acc.shape() {
            return Err(Error::DimensionMismatch(
                "channels of different shapes".into(),
            ));
        }
        acc += h;
    }
    Ok(acc / Complex64::new(channels.len() as f64, 0.0))
}

/// Columns of the right pseudo-inverse of `H_bar`, each scaled to power
/// `P_max / M`, so that `H_bar V` is diagonal.
pub fn zf_beamformers(channels: &[DMatrix<Complex64>], p_max: f64) -> Result<ZfOutcome> {
    let hbar = average_channel(channels)?;
    zf_from_channel(&hbar, p_max)
}

pub fn zf_from_channel(hbar: &DMatrix<Complex64>, p_max: f64) -> Result<ZfOutcome> {
    let (m, n) = hbar.shape();
    if m > n {
        return Err(Error::Precondition(format!(
            "zero forcing needs M <= N, got M={m}, N={n}"
        )));
    }
    let gram = hbar * hbar.adjoint();
    let eig = gram.clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min_eig = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let regularized = !(max_eig > 0.0) || min_eig <= RANK_TOL * max_eig;
    let mut pinv = if max_eig > 0.0 {
        let ridge = if regularized {
            RIDGE_FRACTION * gram.trace().re
        } else {
            0.0
        };
        let inv_diag = eig
            .eigenvalues
            .map(|l| Complex64::new(1.0 / (l + ridge), 0.0));
        let inv =
            &eig.eigenvectors * DMatrix::from_diagonal(&inv_diag) * eig.eigenvectors.adjoint();
        hbar.adjoint() * inv
    } else {
        DMatrix::zeros(n, m)
    };
    let per_user = (p_max / m as f64).sqrt();
    for k in 0..m {
        let mut col = pinv.column_mut(k);
        let norm = col.norm();
        if norm > 0.0 && norm.is_finite() {
            col *= Complex64::new(per_user / norm, 0.0);
        } else {
            // no usable direction: any unit vector carries the power
            col.fill(Complex64::new(0.0, 0.0));
            col[k] = Complex64::new(per_user, 0.0);
        }
    }
    Ok(ZfOutcome {
        beamformers: BeamformerSet::new(pinv)?,
        regularized,
    })
}

/// `v_m ∝ conj(h_bar_m)` with power `P_max / M` each.
pub fn matched_filter_beamformers(
    channels: &[DMatrix<Complex64>],
    p_max: f64,
) -> Result<BeamformerSet> {
    let hbar = average_channel(channels)?;
    let (m, n) = hbar.shape();
    let per_user = (p_max / m as f64).sqrt();
    let mut v = DMatrix::<Complex64>::zeros(n, m);
    for k in 0..m {
        let row = hbar.row(k);
        let norm = row.norm();
        for j in 0..n {
            v[(j, k)] = if norm > 0.0 {
                row[j].conj() * (per_user / norm)
            } else if j == k {
                Complex64::new(per_user, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
    }
    BeamformerSet::new(v)
}
