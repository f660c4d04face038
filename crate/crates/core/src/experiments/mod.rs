//! Seeded Monte Carlo sweeps that regenerate the single-user and multi-user
//! comparisons as CSV tables.
//!
//! Every grid point `g` gets `grid_seed(master, g)` and every trial `i` gets
//! `trial_seed(grid_seed, i)`; rows are ordered by `(g, i)` regardless of how
//! trials are scheduled across threads.

pub mod cdf;
pub mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{MultiGeometry, Point3, SystemParams};
use crate::multiuser::{
    dynamic_saa, evaluate_average_rate, fixed_antenna_outcome, BeamformerMode, PsoConfig,
    SaaConfig, SaaOutcome,
};
use crate::seed::{grid_seed, mix, rng_from_seed, trial_seed};
use crate::single_user::{draw_user, user_rate, Placement, RateMetric};
use crate::stats::MeanEstimate;
use crate::units::{dbm_to_watts, watts_to_dbm};

pub use cdf::{cdf_at, cdf_table, CdfPoint};
pub use manifest::{sha256_file, RunManifest, MANIFEST_FILE};

// stream tags mixed into a trial seed
const STREAM_USERS: u64 = 0;
const STREAM_FIRST: u64 = 1;
const STREAM_SECOND: u64 = 2;
const STREAM_EVAL: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    Fig1RateVsD,
    Fig2Surface,
    Fig3Cdf,
    Fig4WmmseVsZf,
    Fig5RateVsBeta,
    Fig6RateVsM,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Fig1RateVsD,
        ExperimentId::Fig2Surface,
        ExperimentId::Fig3Cdf,
        ExperimentId::Fig4WmmseVsZf,
        ExperimentId::Fig5RateVsBeta,
        ExperimentId::Fig6RateVsM,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::Fig1RateVsD => "fig1_rate_vs_D",
            ExperimentId::Fig2Surface => "fig2_surface",
            ExperimentId::Fig3Cdf => "fig3_cdf",
            ExperimentId::Fig4WmmseVsZf => "fig4_wmmse_vs_zf",
            ExperimentId::Fig5RateVsBeta => "fig5_rate_vs_beta",
            ExperimentId::Fig6RateVsM => "fig6_rate_vs_M",
        }
    }

    pub fn is_single_user(&self) -> bool {
        matches!(
            self,
            ExperimentId::Fig1RateVsD | ExperimentId::Fig2Surface | ExperimentId::Fig3Cdf
        )
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    /// Accepts the full name or its `figN` prefix.
    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s || id.as_str().split('_').next() == Some(s))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown experiment {s:?} (expected fig1..fig6 or a full name)"
                ))
            })
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub master_seed: u64,
    /// Independent user deployments per grid point.
    pub trials: usize,
    pub params: SystemParams,
    pub saa: SaaConfig,
    pub pso: PsoConfig,
    pub betas: Vec<f64>,
    pub sides: Vec<f64>,
    pub powers_dbm: Vec<f64>,
    /// User counts swept by the `M` sweep.
    pub user_counts: Vec<usize>,
    pub num_users: usize,
    pub num_waveguides: usize,
    pub cdf_points: usize,
    /// Pinching-antenna rule in the single-user pinching-vs-fixed sweeps.
    pub pinching_placement: Placement,
    /// Also write one row per trial.
    pub trial_rows: bool,
}

impl ExperimentConfig {
    /// Desk-scale defaults for each experiment.
    pub fn defaults(experiment: ExperimentId) -> Self {
        let params = SystemParams::default();
        let mut c = Self {
            experiment,
            master_seed: 0,
            trials: 50,
            params,
            saa: SaaConfig {
                num_samples: 20,
                max_outer_iters: 5,
                ..SaaConfig::default()
            },
            pso: PsoConfig {
                swarm_size: 20,
                max_iters: 30,
                ..PsoConfig::default()
            },
            betas: vec![0.01],
            sides: vec![50.0],
            powers_dbm: vec![watts_to_dbm(params.tx_power)],
            user_counts: vec![4],
            num_users: 4,
            num_waveguides: 4,
            cdf_points: 101,
            pinching_placement: Placement::IgnoreAttenuation,
            trial_rows: true,
        };
        match experiment {
            ExperimentId::Fig1RateVsD => {
                c.betas = vec![1e-5, 1e-1];
                c.trials = 10_000;
                c.sides = vec![10.0, 20.0, 30.0, 40.0, 50.0];
            }
            ExperimentId::Fig2Surface => {
                c.betas = vec![0.01, 0.048, 0.086, 0.124, 0.162, 0.2];
                c.trials = 10_000;
                c.sides = vec![10.0, 20.0, 30.0, 40.0, 50.0];
            }
            ExperimentId::Fig3Cdf => {
                c.betas = vec![0.01, 0.05, 0.1];
                c.sides = vec![20.0];
                c.trials = 1000;
            }
            ExperimentId::Fig4WmmseVsZf => {
                c.powers_dbm = vec![30.0, 35.0, 40.0];
            }
            ExperimentId::Fig5RateVsBeta => {
                c.betas = vec![0.01, 0.05, 0.1, 0.2];
                c.powers_dbm = vec![30.0, 40.0];
            }
            ExperimentId::Fig6RateVsM => {
                c.sides = vec![20.0, 50.0];
                c.user_counts = vec![2, 4, 6, 8];
                c.num_waveguides = 12;
            }
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.saa.validate()?;
        self.pso.validate()?;
        let nonempty = |name: &str, len: usize| {
            if len == 0 {
                Err(Error::InvalidArgument(format!("grid {name} is empty")))
            } else {
                Ok(())
            }
        };
        nonempty("betas", self.betas.len())?;
        nonempty("sides", self.sides.len())?;
        nonempty("pmax-list", self.powers_dbm.len())?;
        nonempty("m-list", self.user_counts.len())?;
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if self.cdf_points < 2 {
            return Err(Error::InvalidArgument("cdf-points must be >= 2".into()));
        }
        for &b in &self.betas {
            if !b.is_finite() || b < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "beta grid value {b} must be >= 0"
                )));
            }
        }
        for &d in &self.sides {
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "side grid value {d} must be > 0"
                )));
            }
        }
        for &p in &self.powers_dbm {
            if !p.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "power grid value {p} must be finite"
                )));
            }
        }
        let counts: &[usize] = match self.experiment {
            ExperimentId::Fig6RateVsM => &self.user_counts,
            _ => std::slice::from_ref(&self.num_users),
        };
        if !self.experiment.is_single_user() {
            for &m in counts {
                if m == 0 || m > self.num_waveguides {
                    return Err(Error::InvalidArgument(format!(
                        "user count {m} must be in 1..={} (number of waveguides)",
                        self.num_waveguides
                    )));
                }
            }
        }
        Ok(())
    }

    /// Resolved settings as `key=value` pairs, in a fixed order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let p = &self.params;
        let e = vec![
            ("experiment", self.experiment.to_string()),
            ("master_seed", self.master_seed.to_string()),
            ("trials", self.trials.to_string()),
            ("freq_hz", p.carrier_freq_hz.to_string()),
            ("alpha", p.atten_alpha.to_string()),
            ("height", p.waveguide_height.to_string()),
            ("n_eff", p.refractive_index.to_string()),
            ("noise_w", p.noise_power.to_string()),
            ("samples", self.saa.num_samples.to_string()),
            ("outer_iters", self.saa.max_outer_iters.to_string()),
            ("rel_tol", self.saa.rel_tol.to_string()),
            ("patience", self.saa.patience.to_string()),
            ("eval_samples", self.saa.num_eval_samples.to_string()),
            ("wmmse_tol", self.saa.wmmse.tol.to_string()),
            ("wmmse_iters", self.saa.wmmse.max_iters.to_string()),
            ("swarm", self.pso.swarm_size.to_string()),
            ("pso_iters", self.pso.max_iters.to_string()),
            ("betas", list(&self.betas)),
            ("sides", list(&self.sides)),
            ("pmax_list_dbm", list(&self.powers_dbm)),
            (
                "m_list",
                self.user_counts
                    .iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("M", self.num_users.to_string()),
            ("N", self.num_waveguides.to_string()),
            ("cdf_points", self.cdf_points.to_string()),
            (
                "pinching_placement",
                self.pinching_placement.as_str().to_string(),
            ),
        ];
        e.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn summary_file(&self) -> String {
        format!("{}.csv", self.experiment.as_str())
    }
}

/// One point of a sweep: column values plus what to run there.
#[derive(Debug, Clone)]
struct GridPoint {
    values: Vec<String>,
    params: SystemParams,
    num_users: usize,
    kind: Comparison,
}

#[derive(Debug, Clone, Copy)]
enum Comparison {
    /// Single-user rates for each listed placement, on a common user.
    Placements(&'static [(&'static str, Placement)]),
    /// Single-user configured pinching rule against the centre antenna.
    SinglePinchingVsFixed(Placement),
    /// Multi-user dynamic SAA against antennas parked at the centre.
    PinchingVsFixed,
    /// Multi-user dynamic SAA with WMMSE against dynamic SAA with ZF.
    WmmseVsZf,
}

impl Comparison {
    fn schemes(&self) -> Vec<&'static str> {
        match self {
            Comparison::Placements(list) => list.iter().map(|(n, _)| *n).collect(),
            Comparison::SinglePinchingVsFixed(_) | Comparison::PinchingVsFixed => {
                vec!["pinching", "fixed"]
            }
            Comparison::WmmseVsZf => vec!["wmmse", "zf"],
        }
    }
}

const FIG1_PLACEMENTS: &[(&str, Placement)] = &[
    ("cardano", Placement::Cardano),
    ("approximate", Placement::Approximate),
    ("ignore_attenuation", Placement::IgnoreAttenuation),
];

/// Per-trial values for each scheme of a single grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub grid_index: usize,
    pub trial_index: usize,
    pub trial_seed: u64,
    pub values: Vec<f64>,
}

/// Mean and standard error of one scheme (or a paired gap) at a grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub grid_index: usize,
    pub grid_values: Vec<String>,
    pub scheme: String,
    pub estimate: MeanEstimate,
    pub grid_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub header: Vec<&'static str>,
    pub schemes: Vec<&'static str>,
    pub summary: Vec<SummaryRow>,
    pub trials: Vec<TrialRecord>,
    pub grid_values: Vec<Vec<String>>,
}

impl ExperimentResults {
    /// Looks up a summary row by its grid column values (as written) and
    /// scheme name.
    pub fn find(&self, grid_values: &[&str], scheme: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| {
            r.scheme == scheme
                && r.grid_values
                    .iter()
                    .map(String::as_str)
                    .eq(grid_values.iter().copied())
        })
    }

    /// Per-trial values of `scheme` at grid point `g`.
    pub fn samples(&self, grid_index: usize, scheme: &str) -> Vec<f64> {
        let k = self
            .schemes
            .iter()
            .position(|s| *s == scheme)
            .expect("known scheme");
        self.trials
            .iter()
            .filter(|t| t.grid_index == grid_index)
            .map(|t| t.values[k])
            .collect()
    }
}

fn grid(config: &ExperimentConfig) -> (Vec<&'static str>, Vec<GridPoint>) {
    let base = config.params;
    let with = |beta: f64, side: f64, pmax_dbm: f64| SystemParams {
        blockage_beta: beta,
        region_side: side,
        tx_power: dbm_to_watts(pmax_dbm),
        ..base
    };
    let p0 = watts_to_dbm(base.tx_power);
    let mut points = Vec::new();
    let header: Vec<&'static str> = match config.experiment {
        ExperimentId::Fig1RateVsD | ExperimentId::Fig2Surface | ExperimentId::Fig3Cdf => {
            let kind = if config.experiment == ExperimentId::Fig1RateVsD {
                Comparison::Placements(FIG1_PLACEMENTS)
            } else {
                Comparison::SinglePinchingVsFixed(config.pinching_placement)
            };
            for &beta in &config.betas {
                for &side in &config.sides {
                    points.push(GridPoint {
                        values: vec![beta.to_string(), side.to_string()],
                        params: with(beta, side, p0),
                        num_users: 1,
                        kind,
                    });
                }
            }
            vec!["beta", "side_m"]
        }
        ExperimentId::Fig4WmmseVsZf => {
            for &beta in &config.betas {
                for &side in &config.sides {
                    for &p in &config.powers_dbm {
                        points.push(GridPoint {
                            values: vec![beta.to_string(), side.to_string(), p.to_string()],
                            params: with(beta, side, p),
                            num_users: config.num_users,
                            kind: Comparison::WmmseVsZf,
                        });
                    }
                }
            }
            vec!["beta", "side_m", "pmax_dbm"]
        }
        ExperimentId::Fig5RateVsBeta => {
            for &beta in &config.betas {
                for &p in &config.powers_dbm {
                    for &side in &config.sides {
                        points.push(GridPoint {
                            values: vec![beta.to_string(), p.to_string(), side.to_string()],
                            params: with(beta, side, p),
                            num_users: config.num_users,
                            kind: Comparison::PinchingVsFixed,
                        });
                    }
                }
            }
            vec!["beta", "pmax_dbm", "side_m"]
        }
        ExperimentId::Fig6RateVsM => {
            for &beta in &config.betas {
                for &p in &config.powers_dbm {
                    for &side in &config.sides {
                        for &m in &config.user_counts {
                            points.push(GridPoint {
                                values: vec![
                                    beta.to_string(),
                                    p.to_string(),
                                    side.to_string(),
                                    m.to_string(),
                                ],
                                params: with(beta, side, p),
                                num_users: m,
                                kind: Comparison::PinchingVsFixed,
                            });
                        }
                    }
                }
            }
            vec!["beta", "pmax_dbm", "side_m", "num_users"]
        }
    };
    (header, points)
}

fn draw_users(rng: &mut impl rand::Rng, side: f64, m: usize) -> Vec<Point3> {
    (0..m)
        .map(|_| {
            let (x, y) = draw_user(rng, side);
            Point3::ground(x, y)
        })
        .collect()
}

fn evaluate(
    geom: &MultiGeometry,
    outcome: &SaaOutcome,
    params: &SystemParams,
    saa: &SaaConfig,
    seed: u64,
) -> Result<f64> {
    let mut at = geom.clone();
    at.set_antenna_x(&outcome.antenna_x)?;
    let est = evaluate_average_rate(
        &at,
        &outcome.beamformers,
        params,
        saa.num_eval_samples,
        &mut rng_from_seed(seed),
    )?;
    Ok(est.mean)
}

fn run_trial(config: &ExperimentConfig, point: &GridPoint, seed: u64) -> Result<Vec<f64>> {
    let params = &point.params;
    match point.kind {
        Comparison::Placements(list) => {
            let (x, y) = draw_user(&mut rng_from_seed(seed), params.region_side);
            list.iter()
                .map(|(_, p)| user_rate(params, x, y, *p, RateMetric::MeanSnr))
                .collect()
        }
        Comparison::SinglePinchingVsFixed(p) => {
            let (x, y) = draw_user(&mut rng_from_seed(seed), params.region_side);
            Ok(vec![
                user_rate(params, x, y, p, RateMetric::MeanSnr)?,
                user_rate(params, x, y, Placement::FixedCenter, RateMetric::MeanSnr)?,
            ])
        }
        Comparison::PinchingVsFixed | Comparison::WmmseVsZf => {
            let side = params.region_side;
            let users = draw_users(
                &mut rng_from_seed(mix(seed, STREAM_USERS)),
                side,
                point.num_users,
            );
            let geom = MultiGeometry::centered(params, config.num_waveguides, users, side)?;
            let eval_seed = mix(seed, STREAM_EVAL);
            let (first, second) = match point.kind {
                Comparison::PinchingVsFixed => {
                    let a = dynamic_saa(
                        &geom,
                        params,
                        &config.saa,
                        &config.pso,
                        BeamformerMode::Wmmse,
                        &mut rng_from_seed(mix(seed, STREAM_FIRST)),
                    )?;
                    let b = fixed_antenna_outcome(
                        &geom,
                        params,
                        &config.saa,
                        BeamformerMode::Wmmse,
                        &mut rng_from_seed(mix(seed, STREAM_SECOND)),
                    )?;
                    (a, b)
                }
                _ => {
                    // matched optimisation streams: both modes see the same first sample set
                    let stream = mix(seed, STREAM_FIRST);
                    let a = dynamic_saa(
                        &geom,
                        params,
                        &config.saa,
                        &config.pso,
                        BeamformerMode::Wmmse,
                        &mut rng_from_seed(stream),
                    )?;
                    let b = dynamic_saa(
                        &geom,
                        params,
                        &config.saa,
                        &config.pso,
                        BeamformerMode::Zf,
                        &mut rng_from_seed(stream),
                    )?;
                    (a, b)
                }
            };
            Ok(vec![
                evaluate(&geom, &first, params, &config.saa, eval_seed)?,
                evaluate(&geom, &second, params, &config.saa, eval_seed)?,
            ])
        }
    }
}

/// Runs the sweep in memory.
pub fn compute(config: &ExperimentConfig) -> Result<ExperimentResults> {
    config.validate()?;
    let (header, points) = grid(config);
    let schemes = points[0].kind.schemes();
    let count = config.trials;
    let jobs: Vec<(usize, usize, u64)> = points
        .iter()
        .enumerate()
        .flat_map(|(g, _)| {
            let gs = grid_seed(config.master_seed, g);
            (0..count).map(move |i| (g, i, trial_seed(gs, i)))
        })
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(g, i, seed)| {
            run_trial(config, &points[g], seed).map(|values| TrialRecord {
                grid_index: g,
                trial_index: i,
                trial_seed: seed,
                values,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = Vec::new();
    for (g, point) in points.iter().enumerate() {
        let rows: Vec<&TrialRecord> = trials.iter().filter(|t| t.grid_index == g).collect();
        let column = |k: usize| rows.iter().map(|t| t.values[k]).collect::<Vec<f64>>();
        let gs = grid_seed(config.master_seed, g);
        let mut push = |scheme: String, estimate: MeanEstimate| {
            summary.push(SummaryRow {
                grid_index: g,
                grid_values: point.values.clone(),
                scheme,
                estimate,
                grid_seed: gs,
            });
        };
        for (k, s) in schemes.iter().enumerate() {
            push(s.to_string(), MeanEstimate::from_samples(&column(k)));
        }
        let first = column(0);
        let last = column(schemes.len() - 1);
        let gap = MeanEstimate::paired_difference(&first, &last);
        push("gap".to_string(), gap);
        if config.experiment == ExperimentId::Fig2Surface {
            push("relative_gap".to_string(), relative_gap(&first, &last));
        }
    }
    Ok(ExperimentResults {
        header,
        schemes,
        summary,
        trials,
        grid_values: points.into_iter().map(|p| p.values).collect(),
    })
}

/// `(mean(a) - mean(b)) / mean(a)` with a delta-method standard error.
pub fn relative_gap(a: &[f64], b: &[f64]) -> MeanEstimate {
    let ea = MeanEstimate::from_samples(a);
    let eb = MeanEstimate::from_samples(b);
    if ea.mean == 0.0 || ea.mean.is_nan() {
        return MeanEstimate {
            mean: f64::NAN,
            stderr: f64::NAN,
            count: a.len(),
        };
    }
    let r = (ea.mean - eb.mean) / ea.mean;
    // r = 1 - mean(b)/mean(a); linearise around the means
    let lin: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| (eb.mean * x / ea.mean - y) / ea.mean)
        .collect();
    let se = MeanEstimate::from_samples(&lin).stderr;
    MeanEstimate {
        mean: r,
        stderr: se,
        count: a.len(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub results: ExperimentResults,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

fn csv_join(values: &[String]) -> String {
    values.join(",")
}

fn render_summary(results: &ExperimentResults) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{},scheme,mean_rate_bps_hz,stderr,trials,seed",
        results.header.join(",")
    );
    for r in &results.summary {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            csv_join(&r.grid_values),
            r.scheme,
            r.estimate.mean,
            r.estimate.stderr,
            r.estimate.count,
            r.grid_seed
        );
    }
    s
}

fn render_trials(results: &ExperimentResults) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "grid_index,trial_index,trial_seed,{},scheme,rate_bps_hz",
        results.header.join(",")
    );
    for t in &results.trials {
        for (k, scheme) in results.schemes.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                t.grid_index,
                t.trial_index,
                t.trial_seed,
                csv_join(&results.grid_values[t.grid_index]),
                scheme,
                t.values[k]
            );
        }
    }
    s
}

fn render_cdfs(
    config: &ExperimentConfig,
    results: &ExperimentResults,
) -> Result<Vec<(String, String)>> {
    let all: Vec<f64> = results
        .trials
        .iter()
        .flat_map(|t| t.values.iter().cloned())
        .collect();
    let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let thresholds = cdf::thresholds(lo, hi, config.cdf_points)?;
    let mut out = Vec::new();
    for (g, values) in results.grid_values.iter().enumerate() {
        for scheme in &results.schemes {
            let table = cdf_at(&results.samples(g, scheme), &thresholds)?;
            let mut s = String::from("threshold_bps_hz,cdf,stderr\n");
            for p in table {
                let _ = writeln!(s, "{},{},{}", p.threshold, p.probability, p.stderr);
            }
            let name = format!(
                "{}_beta_{}_side_{}_{}.csv",
                config.experiment.as_str(),
                values[0],
                values[1],
                scheme
            );
            out.push((name, s));
        }
    }
    Ok(out)
}

/// Files `run_experiment` would write, relative to the output directory.
pub fn planned_files(config: &ExperimentConfig) -> Vec<String> {
    let mut v = vec![config.summary_file()];
    if config.trial_rows {
        v.push(format!("{}_trials.csv", config.experiment.as_str()));
    }
    v.push(MANIFEST_FILE.to_string());
    v
}

/// Refuses to overwrite earlier results unless `force` is set.
pub fn check_output_dir(config: &ExperimentConfig, dir: &Path, force: bool) -> Result<()> {
    if force {
        return Ok(());
    }
    for f in planned_files(config) {
        let p = dir.join(f);
        if p.exists() {
            return Err(Error::OutputExists(p));
        }
    }
    Ok(())
}

/// Runs the sweep and writes the summary CSV, optional per-trial CSV, CDF
/// tables for the CDF experiment, and the manifest.
pub fn run_experiment(
    config: &ExperimentConfig,
    dir: &Path,
    force: bool,
) -> Result<ExperimentReport> {
    config.validate()?;
    fs::create_dir_all(dir)?;
    check_output_dir(config, dir, force)?;
    let started = Instant::now();
    let mut manifest = RunManifest::new();
    manifest.push("experiment", config.experiment);
    manifest.push("master_seed", config.master_seed);
    manifest.push("version", env!("CARGO_PKG_VERSION"));
    if !config.experiment.is_single_user() {
        // counts chosen for desk-scale runs
        manifest.push(
            "artifact_choices",
            "trials,samples,outer_iters,swarm,pso_iters",
        );
    }
    for (k, v) in config.entries() {
        manifest.push(format!("config.{k}"), v);
    }
    manifest.start(dir)?;

    let results = compute(config)?;
    let mut outputs = vec![(config.summary_file(), render_summary(&results))];
    if config.trial_rows {
        outputs.push((
            format!("{}_trials.csv", config.experiment.as_str()),
            render_trials(&results),
        ));
    }
    if config.experiment == ExperimentId::Fig3Cdf {
        outputs.extend(render_cdfs(config, &results)?);
    }
    let mut files = Vec::new();
    for (name, body) in outputs {
        let path = dir.join(name);
        fs::write(&path, body)?;
        files.push(path);
    }
    let manifest_path = manifest.finalize(dir, &files, started.elapsed())?;
    Ok(ExperimentReport {
        results,
        files,
        manifest: manifest_path,
    })
}
