//! Multi-user downlink: one pinching antenna per waveguide, `M <= N` users,
//! sum-rate maximisation averaged over random blockage.
//!
//! Channels use the plain transpose throughout: user `m` receives
//! `h_m^T v_i` from the beam of user `i`, where `h_m` is row `m` of the
//! effective `M x N` channel.

pub mod pso;
pub mod saa;
pub mod wmmse;
pub mod zf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{
    los_matrix, los_probability_matrix, sample_with_probabilities, BlockageRealization,
    MultiGeometry, SystemParams,
};
use crate::stats::MeanEstimate;

pub use pso::{pso_optimize_antenna, AntennaFitness, PsoConfig, PsoOutcome};
pub use saa::{
    dynamic_saa, evaluate_average_rate, fixed_antenna_baseline, fixed_antenna_outcome,
    BaselineOutcome, BeamformerMode, SaaConfig, SaaIteration, SaaOutcome,
};
pub use wmmse::{wmmse_beamformers, WmmseConfig, WmmseOutcome, WmmseState};
pub use zf::{matched_filter_beamformers, zf_beamformers, ZfOutcome};

/// Relative slack allowed on the total power budget.
pub const POWER_SLACK: f64 = 1e-9;

/// Beamformers as an `N x M` matrix; column `m` is `v_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    pub v: DMatrix<Complex64>,
}

impl BeamformerSet {
    pub fn new(v: DMatrix<Complex64>) -> Result<Self> {
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("beamformer".into()));
        }
        Ok(Self { v })
    }

    pub fn zeros(num_waveguides: usize, num_users: usize) -> Self {
        Self {
            v: DMatrix::zeros(num_waveguides, num_users),
        }
    }

    pub fn num_waveguides(&self) -> usize {
        self.v.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.v.ncols()
    }

    /// `sum_m ||v_m||^2` (W).
    pub fn total_power(&self) -> f64 {
        self.v.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_feasible(&self, p_max: f64) -> bool {
        self.total_power() <= p_max * (1.0 + POWER_SLACK)
    }
}

/// `L` blockage draws and the antenna positions they were drawn at.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub realizations: Vec<BlockageRealization>,
    pub generated_at_positions: Vec<f64>,
}

impl SampleSet {
    pub fn draw<R: Rng + ?Sized>(
        rng: &mut R,
        params: &SystemParams,
        geom: &MultiGeometry,
        num_samples: usize,
    ) -> Result<Self> {
        if num_samples == 0 {
            return Err(Error::InvalidArgument(
                "number of samples must be >= 1".into(),
            ));
        }
        let probs = los_probability_matrix(params, geom);
        let realizations = (0..num_samples)
            .map(|_| sample_with_probabilities(rng, &probs))
            .collect();
        Ok(Self {
            realizations,
            generated_at_positions: geom.antenna_x.clone(),
        })
    }

    /// `L` copies of a fixed realization.
    pub fn repeated(
        realization: BlockageRealization,
        num_samples: usize,
        positions: Vec<f64>,
    ) -> Self {
        Self {
            realizations: vec![realization; num_samples],
            generated_at_positions: positions,
        }
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }
}

/// Effective channels `gamma^(l) .* H_LoS` at the current antenna positions.
pub fn sample_channels(
    params: &SystemParams,
    geom: &MultiGeometry,
    samples: &SampleSet,
) -> Result<Vec<DMatrix<Complex64>>> {
    let shape = (geom.num_users(), geom.num_waveguides());
    let los = los_matrix(params, geom);
    samples
        .realizations
        .iter()
        .map(|r| {
            if r.gamma.shape() != shape {
                return Err(Error::DimensionMismatch(format!(
                    "blockage realization is {:?}, geometry is {shape:?}",
                    r.gamma.shape()
                )));
            }
            Ok(los.masked(r).h)
        })
        .collect()
}

fn check_dims(h: &DMatrix<Complex64>, v: &BeamformerSet) -> Result<()> {
    if h.ncols() != v.num_waveguides() || h.nrows() != v.num_users() {
        return Err(Error::DimensionMismatch(format!(
            "channel is {}x{}, beamformers are {}x{}",
            h.nrows(),
            h.ncols(),
            v.num_waveguides(),
            v.num_users()
        )));
    }
    Ok(())
}

/// Sum rate of one realisation given the `M x M` matrix `Z = H V`,
/// `Z[m][i] = h_m^T v_i`.
pub(crate) fn sum_rate_from_products(z: &DMatrix<Complex64>, noise_power: f64) -> f64 {
    let m = z.nrows();
    let mut total = 0.0;
    for k in 0..m {
        let mut received = 0.0;
        for i in 0..m {
            received += z[(k, i)].norm_sqr();
        }
        let signal = z[(k, k)].norm_sqr();
        let interference = (received - signal).max(0.0);
        total += (signal / (interference + noise_power)).ln_1p();
    }
    total / std::f64::consts::LN_2
}

/// Sum rate `sum_m log2(1 + SINR_m)` for one channel realisation.
pub fn sum_rate(h: &DMatrix<Complex64>, v: &BeamformerSet, noise_power: f64) -> Result<f64> {
    check_dims(h, v)?;
    Ok(sum_rate_from_products(&(h * &v.v), noise_power))
}

/// Empirical average of the sum rate over precomputed channels.
pub fn empirical_sum_rate_channels(
    channels: &[DMatrix<Complex64>],
    v: &BeamformerSet,
    noise_power: f64,
) -> Result<f64> {
    if channels.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    let mut acc = 0.0;
    for h in channels {
        acc += sum_rate(h, v, noise_power)?;
    }
    Ok(acc / channels.len() as f64)
}

/// `(1/L) sum_l sum_m log2(1 + SINR_m^(l))` at the geometry's antenna
/// positions.
pub fn empirical_sum_rate(
    v: &BeamformerSet,
    samples: &SampleSet,
    geom: &MultiGeometry,
    params: &SystemParams,
) -> Result<f64> {
    empirical_sum_rate_channels(
        &sample_channels(params, geom, samples)?,
        v,
        params.noise_power,
    )
}

/// Per-realisation sum rates over `num_samples` fresh blockage draws, with
/// the LoS matrix computed once.
pub fn sampled_sum_rates<R: Rng + ?Sized>(
    geom: &MultiGeometry,
    v: &BeamformerSet,
    params: &SystemParams,
    num_samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let los = los_matrix(params, geom);
    check_dims(&los.h, v)?;
    let probs = los_probability_matrix(params, geom);
    Ok((0..num_samples)
        .map(|_| {
            let h = los.masked(&sample_with_probabilities(rng, &probs)).h;
            sum_rate_from_products(&(h * &v.v), params.noise_power)
        })
        .collect())
}

pub(crate) fn mean_estimate(rates: &[f64]) -> MeanEstimate {
    MeanEstimate::from_samples(rates)
}
