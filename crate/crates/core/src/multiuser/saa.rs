//! Dynamic sample-average approximation: alternate beamforming and antenna
//! placement, drawing fresh blockage samples at the current positions in
//! every outer iteration.

use rand::Rng;

use super::pso::{pso_optimize_antenna, PsoConfig};
use super::wmmse::{wmmse_beamformers, WmmseConfig};
use super::zf::{matched_filter_beamformers, zf_beamformers};
use super::{
    empirical_sum_rate_channels, mean_estimate, sample_channels, sampled_sum_rates, BeamformerSet,
    SampleSet,
};
use crate::error::{Error, Result};
use crate::model::{MultiGeometry, SystemParams};
use crate::stats::MeanEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BeamformerMode {
    Wmmse,
    Zf,
}

impl BeamformerMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BeamformerMode::Wmmse => "wmmse",
            BeamformerMode::Zf => "zf",
        }
    }
}

impl std::str::FromStr for BeamformerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wmmse" => Ok(BeamformerMode::Wmmse),
            "zf" => Ok(BeamformerMode::Zf),
            other => Err(Error::InvalidArgument(format!(
                "unknown beamformer mode {other:?} (wmmse|zf)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaaConfig {
    pub num_samples: usize,
    pub max_outer_iters: usize,
    pub rel_tol: f64,
    /// Consecutive iterations below `rel_tol` required to stop.
    pub patience: usize,
    /// Fresh draws used by out-of-sample evaluation.
    pub num_eval_samples: usize,
    pub wmmse: WmmseConfig,
}

impl Default for SaaConfig {
    fn default() -> Self {
        Self {
            num_samples: 100,
            max_outer_iters: 20,
            rel_tol: 1e-3,
            patience: 2,
            num_eval_samples: 10_000,
            wmmse: WmmseConfig::default(),
        }
    }
}

impl SaaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0
            || self.max_outer_iters == 0
            || self.num_eval_samples == 0
            || self.patience == 0
        {
            return Err(Error::InvalidArgument("SAA counts must be >= 1".into()));
        }
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "rel_tol must be > 0, got {}",
                self.rel_tol
            )));
        }
        if !(self.wmmse.tol >= 0.0) || self.wmmse.max_iters == 0 {
            return Err(Error::InvalidArgument(
                "WMMSE tolerance must be >= 0 and iterations >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaaIteration {
    pub iteration: usize,
    /// Empirical sum rate after the updates, on this iteration's samples.
    pub objective: f64,
    pub rel_change: f64,
    pub antenna_x: Vec<f64>,
    pub total_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaaOutcome {
    pub antenna_x: Vec<f64>,
    pub beamformers: BeamformerSet,
    pub trajectory: Vec<SaaIteration>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutcome {
    pub outcome: SaaOutcome,
    pub rate: MeanEstimate,
}

fn initial_beamformers(
    channels: &[nalgebra::DMatrix<num_complex::Complex64>],
    p_max: f64,
) -> Result<BeamformerSet> {
    let zf = zf_beamformers(channels, p_max)?;
    if zf.regularized {
        matched_filter_beamformers(channels, p_max)
    } else {
        Ok(zf.beamformers)
    }
}

fn run_loop<R: Rng + ?Sized>(
    geom: &MultiGeometry,
    params: &SystemParams,
    saa: &SaaConfig,
    pso: Option<&PsoConfig>,
    mode: BeamformerMode,
    rng: &mut R,
) -> Result<SaaOutcome> {
    params.validate()?;
    saa.validate()?;
    if let Some(p) = pso {
        p.validate()?;
    }
    let p_max = params.tx_power;
    let mut geom = geom.clone();
    let mut v: Option<BeamformerSet> = None;
    let mut trajectory: Vec<SaaIteration> = Vec::new();
    let mut calm = 0usize;
    let mut converged = false;
    for t in 0..saa.max_outer_iters {
        let samples = SampleSet::draw(rng, params, &geom, saa.num_samples)?;
        let channels = sample_channels(params, &geom, &samples)?;
        let next = match mode {
            BeamformerMode::Zf => zf_beamformers(&channels, p_max)?.beamformers,
            BeamformerMode::Wmmse => {
                let fresh = initial_beamformers(&channels, p_max)?;
                let start = match v.take() {
                    Some(prev) => {
                        let keep =
                            empirical_sum_rate_channels(&channels, &prev, params.noise_power)?;
                        let restart =
                            empirical_sum_rate_channels(&channels, &fresh, params.noise_power)?;
                        if keep >= restart {
                            prev
                        } else {
                            fresh
                        }
                    }
                    None => fresh,
                };
                wmmse_beamformers(&start, &channels, params.noise_power, p_max, &saa.wmmse)?
                    .beamformers
            }
        };
        if let Some(cfg) = pso {
            for n in 0..geom.num_waveguides() {
                let out = pso_optimize_antenna(n, &next, &samples, &geom, params, cfg, rng)?;
                geom.antenna_x[n] = out.position;
            }
        }
        let objective = super::empirical_sum_rate(&next, &samples, &geom, params)?;
        let rel_change = match trajectory.last() {
            Some(prev) => {
                (objective - prev.objective).abs() / prev.objective.abs().max(f64::MIN_POSITIVE)
            }
            None => f64::INFINITY,
        };
        trajectory.push(SaaIteration {
            iteration: t,
            objective,
            rel_change,
            antenna_x: geom.antenna_x.clone(),
            total_power: next.total_power(),
        });
        v = Some(next);
        calm = if rel_change < saa.rel_tol {
            calm + 1
        } else {
            0
        };
        if calm >= saa.patience {
            converged = true;
            break;
        }
    }
    Ok(SaaOutcome {
        antenna_x: geom.antenna_x.clone(),
        beamformers: v.expect("at least one outer iteration"),
        trajectory,
        converged,
    })
}

/// Joint beamforming and antenna placement from the geometry's initial
/// positions.
pub fn dynamic_saa<R: Rng + ?Sized>(
    geom: &MultiGeometry,
    params: &SystemParams,
    saa: &SaaConfig,
    pso: &PsoConfig,
    mode: BeamformerMode,
    rng: &mut R,
) -> Result<SaaOutcome> {
    run_loop(geom, params, saa, Some(pso), mode, rng)
}

/// The SAA loop with every antenna parked at `x_max / 2` and the placement
/// step skipped.
pub fn fixed_antenna_outcome<R: Rng + ?Sized>(
    geom: &MultiGeometry,
    params: &SystemParams,
    saa: &SaaConfig,
    mode: BeamformerMode,
    rng: &mut R,
) -> Result<SaaOutcome> {
    run_loop(&parked(geom), params, saa, None, mode, rng)
}

fn parked(geom: &MultiGeometry) -> MultiGeometry {
    let mut fixed = geom.clone();
    fixed
        .antenna_x
        .iter_mut()
        .for_each(|x| *x = geom.x_max / 2.0);
    fixed
}

/// [`fixed_antenna_outcome`] plus its out-of-sample rate over
/// `saa.num_eval_samples` fresh draws from the same generator.
pub fn fixed_antenna_baseline<R: Rng + ?Sized>(
    geom: &MultiGeometry,
    params: &SystemParams,
    saa: &SaaConfig,
    mode: BeamformerMode,
    rng: &mut R,
) -> Result<BaselineOutcome> {
    let outcome = fixed_antenna_outcome(geom, params, saa, mode, rng)?;
    let rate = evaluate_average_rate(
        &parked(geom),
        &outcome.beamformers,
        params,
        saa.num_eval_samples,
        rng,
    )?;
    Ok(BaselineOutcome { outcome, rate })
}

/// Out-of-sample sum rate at the geometry's antenna positions.
pub fn evaluate_average_rate<R: Rng + ?Sized>(
    geom: &MultiGeometry,
    v: &BeamformerSet,
    params: &SystemParams,
    num_eval_samples: usize,
    rng: &mut R,
) -> Result<MeanEstimate> {
    if num_eval_samples == 0 {
        return Err(Error::InvalidArgument(
            "num_eval_samples must be >= 1".into(),
        ));
    }
    Ok(mean_estimate(&sampled_sum_rates(
        geom,
        v,
        params,
        num_eval_samples,
        rng,
    )?))
}
