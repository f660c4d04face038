//! Line-oriented `key = value` settings shared by config files and command
//! line flags.
//!
//! Keys use dashes; underscores are accepted and normalised. Every value is
//! checked against its key's kind when it is set, so errors always name the
//! offending key.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, ExperimentId};
use crate::model::SystemParams;
use crate::multiuser::{BeamformerMode, PsoConfig, SaaConfig};
use crate::single_user::Placement;
use crate::units::{db_per_m_to_alpha, dbm_to_watts};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Real,
    NonNegative,
    Positive,
    AtLeastOne,
    Count {
        min: usize,
    },
    Seed,
    Flag,
    Choice(&'static [&'static str]),
    NonNegativeList,
    PositiveList,
    RealList,
    CountList,
    /// `x:y;x:y;...`
    Users,
    Path,
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: ValueKind,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: ValueKind, help: &'static str) -> KeySpec {
    KeySpec { name, kind, help }
}

pub const MODES: &[&str] = &["wmmse", "zf"];
pub const FORMATS: &[&str] = &["text", "csv"];
pub const PLACEMENTS: &[&str] = &[
    "cardano",
    "approximate",
    "ignore_attenuation",
    "fixed_center",
];

use ValueKind::*;

pub const KNOWN_KEYS: &[KeySpec] = &[
    key("user-x", Real, "user x coordinate (m)"),
    key("user-y", Real, "user y coordinate (m)"),
    key("alpha", NonNegative, "in-waveguide attenuation (1/m)"),
    key(
        "alpha-db-per-m",
        NonNegative,
        "in-waveguide attenuation (dB/m)",
    ),
    key("beta", NonNegative, "blockage density (1/m)"),
    key("height", Positive, "waveguide height d_v (m)"),
    key("side", Positive, "region side length D (m)"),
    key("freq-ghz", Positive, "carrier frequency (GHz)"),
    key("n-eff", AtLeastOne, "effective refractive index"),
    key("noise-dbm", Real, "noise power (dBm)"),
    key("pmax-dbm", Real, "transmit power budget (dBm)"),
    key("M", Count { min: 1 }, "number of users"),
    key("N", Count { min: 1 }, "number of waveguides"),
    key(
        "x-max",
        NonNegative,
        "waveguide length (m), defaults to the side length",
    ),
    key("users", Users, "explicit user positions x:y;x:y;..."),
    key("mode", Choice(MODES), "beamformer: wmmse or zf"),
    key(
        "samples",
        Count { min: 1 },
        "blockage samples per iteration L",
    ),
    key(
        "outer-iters",
        Count { min: 1 },
        "maximum outer iterations T_max",
    ),
    key(
        "rel-tol",
        Positive,
        "relative objective change for convergence",
    ),
    key(
        "patience",
        Count { min: 1 },
        "consecutive small changes before stopping",
    ),
    key(
        "eval-samples",
        Count { min: 1 },
        "out-of-sample evaluation draws",
    ),
    key("wmmse-tol", NonNegative, "WMMSE relative tolerance"),
    key("wmmse-iters", Count { min: 1 }, "WMMSE sweep limit"),
    key("swarm", Count { min: 1 }, "PSO swarm size S"),
    key("pso-iters", Count { min: 1 }, "PSO iterations K"),
    key(
        "trials",
        Count { min: 1 },
        "independent deployments per grid point",
    ),
    key("betas", NonNegativeList, "comma-separated beta grid"),
    key(
        "sides",
        PositiveList,
        "comma-separated side length grid (m)",
    ),
    key("pmax-list", RealList, "comma-separated power grid (dBm)"),
    key("m-list", CountList, "comma-separated user count grid"),
    key("cdf-points", Count { min: 2 }, "CDF thresholds"),
    key(
        "placement",
        Choice(PLACEMENTS),
        "single-user pinching rule in pinching-vs-fixed sweeps",
    ),
    key("trial-rows", Flag, "also write per-trial rows (true/false)"),
    key(
        "oracle-step",
        Positive,
        "grid step of the placement oracle (m)",
    ),
    key("seed", Seed, "master seed"),
    key("output-dir", Path, "output directory"),
    key("format", Choice(FORMATS), "output format: text or csv"),
    key(
        "dry-run",
        Flag,
        "print the resolved config and write nothing",
    ),
    key("force", Flag, "overwrite existing outputs"),
];

pub fn normalize_key(raw: &str) -> String {
    raw.trim().replace('_', "-")
}

pub fn spec(name: &str) -> Option<&'static KeySpec> {
    KNOWN_KEYS.iter().find(|k| k.name == name)
}

fn bad(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("key `{key}`: {msg}"))
}

fn parse_real(key: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| bad(key, format!("expected a number, got {s:?}")))?;
    if !v.is_finite() {
        return Err(bad(key, format!("must be finite, got {s}")));
    }
    Ok(v)
}

fn parse_count(key: &str, s: &str, min: usize) -> Result<usize> {
    let v: usize = s
        .trim()
        .parse()
        .map_err(|_| bad(key, format!("expected a non-negative integer, got {s:?}")))?;
    if v < min {
        return Err(bad(key, format!("must be >= {min}, got {v}")));
    }
    Ok(v)
}

fn parse_flag(key: &str, s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(bad(key, format!("expected true or false, got {other:?}"))),
    }
}

fn check_real(key: &str, v: f64, kind: ValueKind) -> Result<f64> {
    let ok = match kind {
        NonNegative | NonNegativeList => v >= 0.0,
        Positive | PositiveList => v > 0.0,
        AtLeastOne => v >= 1.0,
        _ => true,
    };
    let rule = match kind {
        NonNegative | NonNegativeList => "must be >= 0",
        Positive | PositiveList => "must be > 0",
        AtLeastOne => "must be >= 1",
        _ => "",
    };
    if ok {
        Ok(v)
    } else {
        Err(bad(key, format!("{rule}, got {v}")))
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

pub fn parse_users(key: &str, s: &str) -> Result<Vec<(f64, f64)>> {
    let users = s
        .split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|pair| {
            let (x, y) = pair
                .split_once(':')
                .ok_or_else(|| bad(key, format!("expected x:y, got {pair:?}")))?;
            Ok((parse_real(key, x)?, parse_real(key, y)?))
        })
        .collect::<Result<Vec<_>>>()?;
    if users.is_empty() {
        return Err(bad(key, "empty user list"));
    }
    Ok(users)
}

/// Checks `value` against the kind of `key`.
fn check_value(spec: &KeySpec, value: &str) -> Result<()> {
    let k = spec.name;
    match spec.kind {
        Real | NonNegative | Positive | AtLeastOne => {
            check_real(k, parse_real(k, value)?, spec.kind)?;
        }
        Count { min } => {
            parse_count(k, value, min)?;
        }
        Seed => {
            value.trim().parse::<u64>().map_err(|_| {
                bad(
                    k,
                    format!("expected a 64-bit unsigned integer, got {value:?}"),
                )
            })?;
        }
        Flag => {
            parse_flag(k, value)?;
        }
        Choice(options) => {
            if !options.contains(&value.trim()) {
                return Err(bad(
                    k,
                    format!("expected one of {}, got {value:?}", options.join(", ")),
                ));
            }
        }
        NonNegativeList | PositiveList | RealList => {
            let mut any = false;
            for t in split_list(value) {
                check_real(k, parse_real(k, t)?, spec.kind)?;
                any = true;
            }
            if !any {
                return Err(bad(k, "empty list"));
            }
        }
        CountList => {
            let mut any = false;
            for t in split_list(value) {
                parse_count(k, t, 1)?;
                any = true;
            }
            if !any {
                return Err(bad(k, "empty list"));
            }
        }
        Users => {
            parse_users(k, value)?;
        }
        Path => {
            if value.trim().is_empty() {
                return Err(bad(k, "empty path"));
            }
        }
    }
    Ok(())
}

/// Validated raw settings. Later `set` calls override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<&'static str, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, raw_key: &str, value: &str) -> Result<()> {
        let name = normalize_key(raw_key);
        let spec =
            spec(&name).ok_or_else(|| Error::InvalidArgument(format!("unknown key `{name}`")))?;
        check_value(spec, value)?;
        self.values.insert(spec.name, value.trim().to_string());
        Ok(())
    }

    /// Parses config file text.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("config line {}: expected `key = value`", i + 1))
            })?;
            s.set(k, v).map_err(|e| match e {
                Error::InvalidArgument(m) => {
                    Error::InvalidArgument(format!("config line {}: {m}", i + 1))
                }
                other => other,
            })?;
        }
        Ok(s)
    }

    /// Applies every value of `other` on top of `self`.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k, v.clone());
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Explicitly set keys in table order.
    pub fn entries(&self) -> Vec<(&'static str, &str)> {
        KNOWN_KEYS
            .iter()
            .filter_map(|k| self.values.get(k.name).map(|v| (k.name, v.as_str())))
            .collect()
    }

    pub fn real(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|v| parse_real(key, v)).transpose()
    }

    pub fn count(&self, key: &str) -> Result<Option<usize>> {
        self.raw(key).map(|v| parse_count(key, v, 0)).transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        Ok(self
            .raw(key)
            .map(|v| parse_flag(key, v))
            .transpose()?
            .unwrap_or(false))
    }

    pub fn seed(&self) -> Result<Option<u64>> {
        self.raw("seed")
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| bad("seed", format!("invalid seed {v:?}")))
            })
            .transpose()
    }

    pub fn reals(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| split_list(v).map(|t| parse_real(key, t)).collect())
            .transpose()
    }

    pub fn counts(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.raw(key)
            .map(|v| split_list(v).map(|t| parse_count(key, t, 1)).collect())
            .transpose()
    }

    pub fn users(&self) -> Result<Option<Vec<(f64, f64)>>> {
        self.raw("users")
            .map(|v| parse_users("users", v))
            .transpose()
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    /// System parameters with defaults for every unset key.
    pub fn params(&self) -> Result<SystemParams> {
        let mut p = SystemParams::default();
        if self.contains("alpha") && self.contains("alpha-db-per-m") {
            return Err(bad(
                "alpha-db-per-m",
                "conflicts with `alpha`; set only one",
            ));
        }
        if let Some(a) = self.real("alpha")? {
            p.atten_alpha = a;
        }
        if let Some(a) = self.real("alpha-db-per-m")? {
            p.atten_alpha = db_per_m_to_alpha(a);
        }
        if let Some(b) = self.real("beta")? {
            p.blockage_beta = b;
        }
        if let Some(h) = self.real("height")? {
            p.waveguide_height = h;
        }
        if let Some(d) = self.real("side")? {
            p.region_side = d;
        }
        if let Some(f) = self.real("freq-ghz")? {
            p.carrier_freq_hz = f * 1e9;
        }
        if let Some(n) = self.real("n-eff")? {
            p.refractive_index = n;
        }
        if let Some(n) = self.real("noise-dbm")? {
            p.noise_power = dbm_to_watts(n);
        }
        if let Some(t) = self.real("pmax-dbm")? {
            p.tx_power = dbm_to_watts(t);
        }
        p.validate()?;
        Ok(p)
    }

    pub fn x_max(&self, params: &SystemParams) -> Result<f64> {
        Ok(self
            .real("x-max")?
            .unwrap_or_else(|| params.default_x_max()))
    }

    pub fn saa(&self, base: SaaConfig) -> Result<SaaConfig> {
        let mut c = base;
        if let Some(v) = self.count("samples")? {
            c.num_samples = v;
        }
        if let Some(v) = self.count("outer-iters")? {
            c.max_outer_iters = v;
        }
        if let Some(v) = self.real("rel-tol")? {
            c.rel_tol = v;
        }
        if let Some(v) = self.count("patience")? {
            c.patience = v;
        }
        if let Some(v) = self.count("eval-samples")? {
            c.num_eval_samples = v;
        }
        if let Some(v) = self.real("wmmse-tol")? {
            c.wmmse.tol = v;
        }
        if let Some(v) = self.count("wmmse-iters")? {
            c.wmmse.max_iters = v;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn pso(&self, base: PsoConfig) -> Result<PsoConfig> {
        let mut c = base;
        if let Some(v) = self.count("swarm")? {
            c.swarm_size = v;
        }
        if let Some(v) = self.count("pso-iters")? {
            c.max_iters = v;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn mode(&self) -> Result<BeamformerMode> {
        self.raw("mode").unwrap_or("wmmse").parse()
    }

    pub fn placement(&self) -> Option<Placement> {
        self.raw("placement")
            .and_then(|v| Placement::ALL.into_iter().find(|p| p.as_str() == v))
    }

    pub fn csv_format(&self) -> bool {
        self.raw("format") == Some("csv")
    }

    /// Experiment defaults for `id` overridden by these settings.
    pub fn experiment(&self, id: ExperimentId) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::defaults(id);
        c.params = self.params()?;
        // scalar overrides become one-point grids
        if let Some(b) = self.real("beta")? {
            c.betas = vec![b];
        }
        if let Some(d) = self.real("side")? {
            c.sides = vec![d];
        }
        if let Some(p) = self.real("pmax-dbm")? {
            c.powers_dbm = vec![p];
        }
        if let Some(m) = self.count("M")? {
            c.num_users = m;
            c.user_counts = vec![m];
        }
        if let Some(v) = self.reals("betas")? {
            c.betas = v;
        }
        if let Some(v) = self.reals("sides")? {
            c.sides = v;
        }
        if let Some(v) = self.reals("pmax-list")? {
            c.powers_dbm = v;
        }
        if let Some(v) = self.counts("m-list")? {
            c.user_counts = v;
        }
        if let Some(n) = self.count("N")? {
            c.num_waveguides = n;
        }
        if let Some(t) = self.count("trials")? {
            c.trials = t;
        }
        if let Some(k) = self.count("cdf-points")? {
            c.cdf_points = k;
        }
        if let Some(p) = self.placement() {
            c.pinching_placement = p;
        }
        if self.contains("trial-rows") {
            c.trial_rows = self.flag("trial-rows")?;
        }
        c.saa = self.saa(c.saa)?;
        c.pso = self.pso(c.pso)?;
        if let Some(s) = self.seed()? {
            c.master_seed = s;
        }
        c.validate()?;
        Ok(c)
    }
}
