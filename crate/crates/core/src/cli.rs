//! Command-line front end. Exit codes: 0 success, 1 runtime failure, 2
//! invalid configuration.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::config::{Settings, ValueKind, KNOWN_KEYS};
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentId, RunManifest, MANIFEST_FILE};
use crate::model::{MultiGeometry, Point3, SystemParams};
use crate::multiuser::{
    dynamic_saa, empirical_sum_rate_channels, evaluate_average_rate, sample_channels,
    wmmse_beamformers, zf_beamformers, PsoConfig, SaaConfig, SaaOutcome, SampleSet,
};
use crate::rate_analysis::{
    dense_limit_rate_loss, expected_rate_loss, quadrature_rate_loss, sparse_limit_rate_loss,
    RateLossInputs, QUADRATURE_TOL,
};
use crate::seed::{mix, rng_from_seed};
use crate::single_user::{
    approx_position, convexity_holds, draw_user, objective_g_prime, optimal_position_cardano,
    optimal_position_exact, oracle_position, position_ignoring_attenuation, rate_at,
    PlacementResult, RateMetric, SingleUserInstance, ORACLE_GRID_STEP,
};
use crate::units::{alpha_to_db_per_m, db_per_m_to_alpha, dbm_to_watts, watts_to_dbm};

pub const THREADS_ENV: &str = "PINCHSIM_THREADS";

const EXIT_OK: i32 = 0;
const EXIT_RUNTIME: i32 = 1;
const EXIT_CONFIG: i32 = 2;

const SWITCHES: &[&str] = &["dry-run", "force"];

fn command() -> Command {
    let mut cmd = Command::new("pinchsim")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Pinching-antenna placement and beamforming under line-of-sight blockage")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .global(true)
                .help("key = value config file; flags override its values"),
        )
        .subcommand(Command::new("place").about("Single-user antenna placement by every strategy"))
        .subcommand(Command::new("rate-loss").about("Average rate loss from ignoring attenuation"))
        .subcommand(Command::new("optimize").about("Multi-user dynamic SAA for one deployment"))
        .subcommand(
            Command::new("experiment")
                .about("Run a seeded Monte Carlo sweep")
                .arg(
                    Arg::new("id")
                        .required(true)
                        .help("fig1..fig6 or a full experiment name"),
                ),
        )
        .subcommand(Command::new("validate").about("Run numerical self-checks"));
    for k in KNOWN_KEYS {
        let mut arg = Arg::new(k.name).long(k.name).help(k.help).global(true);
        arg = if SWITCHES.contains(&k.name) {
            arg.action(ArgAction::SetTrue)
        } else {
            arg.value_name("VALUE").allow_negative_numbers(true)
        };
        if k.kind == ValueKind::Flag && !SWITCHES.contains(&k.name) {
            arg = arg.value_name("BOOL");
        }
        cmd = cmd.arg(arg);
    }
    cmd
}

fn settings_from(m: &ArgMatches) -> Result<Settings> {
    let mut s = match m.get_one::<String>("config") {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidArgument(format!("cannot read config {path}: {e}")))?;
            Settings::parse(&text)?
        }
        None => Settings::new(),
    };
    let mut flags = Settings::new();
    for k in KNOWN_KEYS {
        if SWITCHES.contains(&k.name) {
            if m.get_flag(k.name) {
                flags.set(k.name, "true")?;
            }
        } else if let Some(v) = m.get_one::<String>(k.name) {
            flags.set(k.name, v)?;
        }
    }
    s.merge(&flags);
    Ok(s)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::OutputExists(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!(
                "{THREADS_ENV} must be a non-negative integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(0),
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_CONFIG
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = dispatch(&matches, out, err);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(matches: &ArgMatches, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let settings = settings_from(sub)?;
    match name {
        "place" => cmd_place(&settings, out, err),
        "rate-loss" => cmd_rate_loss(&settings, out, err),
        "optimize" => cmd_optimize(&settings, out, err),
        "experiment" => {
            let id: ExperimentId = sub.get_one::<String>("id").expect("required").parse()?;
            cmd_experiment(&settings, id, out, err)
        }
        "validate" => cmd_validate(out),
        _ => unreachable!("unknown subcommand {name}"),
    }
}

fn param_entries(p: &SystemParams) -> Vec<(String, String)> {
    [
        ("freq-ghz", (p.carrier_freq_hz / 1e9).to_string()),
        ("alpha", p.atten_alpha.to_string()),
        (
            "alpha-db-per-m",
            alpha_to_db_per_m(p.atten_alpha).to_string(),
        ),
        ("beta", p.blockage_beta.to_string()),
        ("height", p.waveguide_height.to_string()),
        ("side", p.region_side.to_string()),
        ("n-eff", p.refractive_index.to_string()),
        ("noise-dbm", watts_to_dbm(p.noise_power).to_string()),
        ("pmax-dbm", watts_to_dbm(p.tx_power).to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn echo(err: &mut dyn Write, entries: &[(String, String)]) -> Result<()> {
    writeln!(err, "# resolved config")?;
    for (k, v) in entries {
        writeln!(err, "{k} = {v}")?;
    }
    Ok(())
}

fn required_real(s: &Settings, key: &str) -> Result<f64> {
    s.real(key)?
        .ok_or_else(|| Error::InvalidArgument(format!("key `{key}` is required")))
}

fn required_seed(s: &Settings) -> Result<u64> {
    s.seed()?.ok_or_else(|| {
        Error::InvalidArgument(
            "key `seed` is required (pass --seed to make the run reproducible)".into(),
        )
    })
}

fn cmd_place(s: &Settings, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let params = s.params()?;
    let ux = required_real(s, "user-x")?;
    let uy = required_real(s, "user-y")?;
    let x_max = s.x_max(&params)?;
    let step = s.real("oracle-step")?.unwrap_or(ORACLE_GRID_STEP);
    let mut resolved = param_entries(&params);
    resolved.extend([
        ("user-x".to_string(), ux.to_string()),
        ("user-y".to_string(), uy.to_string()),
        ("x-max".to_string(), x_max.to_string()),
        ("oracle-step".to_string(), step.to_string()),
    ]);
    echo(err, &resolved)?;
    let inst = SingleUserInstance::new(
        ux,
        uy,
        params.waveguide_height,
        params.atten_alpha,
        params.blockage_beta,
        x_max,
    )?;
    let cardano = if convexity_holds(&inst) {
        optimal_position_cardano(&inst)?
    } else {
        writeln!(err, "note: beta * height^2 < 1, objective not convex; using the global minimum over stationary points")?;
        optimal_position_exact(&inst)
    };
    let rows: Vec<(&str, PlacementResult)> = vec![
        ("cardano", cardano),
        ("approximate", approx_position(&inst)),
        ("ignore_attenuation", position_ignoring_attenuation(&inst)),
        ("oracle", oracle_position(&inst, step)?),
    ];
    let csv = s.csv_format();
    if csv {
        writeln!(
            out,
            "strategy,antenna_x_m,offset_m,objective_g,rate_bps_hz,method"
        )?;
    } else {
        writeln!(
            out,
            "{:<20} {:>12} {:>12} {:>14} {:>12}  method",
            "strategy", "antenna_x_m", "offset_m", "objective_g", "rate_bps_hz"
        )?;
    }
    for (name, r) in rows {
        let rate = rate_at(&params, ux, uy, r.antenna_x, RateMetric::MeanSnr)?;
        let offset = ux - r.antenna_x;
        if csv {
            writeln!(
                out,
                "{name},{},{offset},{},{rate},{}",
                r.antenna_x,
                r.objective_g,
                r.method.as_str()
            )?;
        } else {
            writeln!(
                out,
                "{name:<20} {:>12.6} {:>12.6} {:>14.8} {:>12.6}  {}",
                r.antenna_x,
                offset,
                r.objective_g,
                rate,
                r.method.as_str()
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_rate_loss(s: &Settings, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let params = s.params()?;
    echo(err, &param_entries(&params))?;
    let inputs = RateLossInputs::new(
        params.atten_alpha,
        params.blockage_beta,
        params.waveguide_height,
        params.region_side,
    )?;
    let sparse = sparse_limit_rate_loss(inputs.alpha, inputs.height, inputs.side);
    let closed = if inputs.beta == 0.0 {
        writeln!(
            err,
            "note: beta = 0, using the sparse-blockage limit for the closed form"
        )?;
        sparse
    } else {
        expected_rate_loss(&inputs)?
    };
    let dense = if inputs.beta > 0.0 {
        dense_limit_rate_loss(inputs.alpha, inputs.beta)?
    } else {
        f64::INFINITY
    };
    let quad = quadrature_rate_loss(&inputs, QUADRATURE_TOL);
    let rel = if quad == 0.0 {
        (closed - quad).abs()
    } else {
        ((closed - quad) / quad).abs()
    };
    let rows = [
        ("closed_form", closed),
        ("sparse_limit", sparse),
        ("dense_limit", dense),
        ("quadrature", quad),
        ("relative_difference", rel),
    ];
    if s.csv_format() {
        writeln!(out, "quantity,rate_loss_bps_hz")?;
        for (k, v) in rows {
            writeln!(out, "{k},{v}")?;
        }
    } else {
        for (k, v) in rows {
            writeln!(out, "{k:<20} {v:.10e}")?;
        }
    }
    Ok(EXIT_OK)
}

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const FINAL_STATE_FILE: &str = "final_state.csv";

fn render_trajectory(outcome: &SaaOutcome) -> String {
    let n = outcome.antenna_x.len();
    let mut s = String::from("iteration,objective_bps_hz,rel_change,total_power_w");
    for i in 0..n {
        let _ = write!(s, ",antenna_x_{i}");
    }
    s.push('\n');
    for it in &outcome.trajectory {
        let _ = write!(
            s,
            "{},{},{},{}",
            it.iteration, it.objective, it.rel_change, it.total_power
        );
        for x in &it.antenna_x {
            let _ = write!(s, ",{x}");
        }
        s.push('\n');
    }
    s
}

fn render_final_state(outcome: &SaaOutcome) -> String {
    let v = &outcome.beamformers.v;
    let mut s = String::from("waveguide,antenna_x_m,user,v_re,v_im\n");
    for n in 0..v.nrows() {
        for m in 0..v.ncols() {
            let c = v[(n, m)];
            let _ = writeln!(s, "{n},{},{m},{},{}", outcome.antenna_x[n], c.re, c.im);
        }
    }
    s
}

fn cmd_optimize(s: &Settings, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let params = s.params()?;
    let seed = required_seed(s)?;
    let explicit = s.users()?;
    let m = match (&explicit, s.count("M")?) {
        (Some(u), Some(m)) if u.len() != m => {
            return Err(Error::InvalidArgument(format!(
                "key `M` = {m} disagrees with {} entries in `users`",
                u.len()
            )))
        }
        (Some(u), _) => u.len(),
        (None, m) => m.unwrap_or(4),
    };
    let n = s.count("N")?.unwrap_or(m.max(4));
    let x_max = s.x_max(&params)?;
    let saa = s.saa(SaaConfig::default())?;
    let pso = s.pso(PsoConfig::default())?;
    let mode = s.mode()?;
    let dir = s
        .path("output-dir")
        .unwrap_or_else(|| PathBuf::from("pinchsim-out/optimize"));
    let users: Vec<Point3> = match &explicit {
        Some(list) => list.iter().map(|&(x, y)| Point3::ground(x, y)).collect(),
        None => {
            let mut rng = rng_from_seed(mix(seed, 0));
            (0..m)
                .map(|_| {
                    let (x, y) = draw_user(&mut rng, params.region_side);
                    Point3::ground(x, y)
                })
                .collect()
        }
    };
    let geom = MultiGeometry::centered(&params, n, users, x_max)?;

    let users_str = geom
        .users
        .iter()
        .map(|u| format!("{}:{}", u.x, u.y))
        .collect::<Vec<_>>()
        .join(";");
    let mut resolved = param_entries(&params);
    resolved.extend(
        [
            ("seed", seed.to_string()),
            ("mode", mode.as_str().to_string()),
            ("M", m.to_string()),
            ("N", n.to_string()),
            ("x-max", x_max.to_string()),
            ("users", users_str),
            ("samples", saa.num_samples.to_string()),
            ("outer-iters", saa.max_outer_iters.to_string()),
            ("rel-tol", saa.rel_tol.to_string()),
            ("patience", saa.patience.to_string()),
            ("eval-samples", saa.num_eval_samples.to_string()),
            ("wmmse-tol", saa.wmmse.tol.to_string()),
            ("wmmse-iters", saa.wmmse.max_iters.to_string()),
            ("swarm", pso.swarm_size.to_string()),
            ("pso-iters", pso.max_iters.to_string()),
            ("output-dir", dir.display().to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v)),
    );
    echo(err, &resolved)?;
    let files = [TRAJECTORY_FILE, FINAL_STATE_FILE, MANIFEST_FILE];
    if s.flag("dry-run")? {
        emit_dry_run(out, &resolved, &dir, &files)?;
        return Ok(EXIT_OK);
    }
    prepare_dir(&dir, &files, s.flag("force")?)?;

    let started = Instant::now();
    let mut manifest = RunManifest::new();
    manifest.push("command", "optimize");
    manifest.push("master_seed", seed);
    manifest.push("version", env!("CARGO_PKG_VERSION"));
    for (k, v) in &resolved {
        manifest.push(format!("config.{k}"), v);
    }
    manifest.start(&dir)?;

    let outcome = dynamic_saa(
        &geom,
        &params,
        &saa,
        &pso,
        mode,
        &mut rng_from_seed(mix(seed, 1)),
    )?;
    let mut at = geom.clone();
    at.set_antenna_x(&outcome.antenna_x)?;
    let rate = evaluate_average_rate(
        &at,
        &outcome.beamformers,
        &params,
        saa.num_eval_samples,
        &mut rng_from_seed(mix(seed, 3)),
    )?;

    let written = [
        (dir.join(TRAJECTORY_FILE), render_trajectory(&outcome)),
        (dir.join(FINAL_STATE_FILE), render_final_state(&outcome)),
    ];
    for (path, body) in &written {
        fs::write(path, body)?;
    }
    manifest.push("iterations", outcome.trajectory.len());
    manifest.push("converged", outcome.converged);
    manifest.push("final_rate_bps_hz", rate.mean);
    manifest.push("final_rate_stderr", rate.stderr);
    let paths: Vec<PathBuf> = written.iter().map(|(p, _)| p.clone()).collect();
    manifest.finalize(&dir, &paths, started.elapsed())?;

    let xs = outcome
        .antenna_x
        .iter()
        .map(|x| format!("{x:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    writeln!(out, "mode: {}", mode.as_str())?;
    writeln!(
        out,
        "iterations: {} (converged: {})",
        outcome.trajectory.len(),
        outcome.converged
    )?;
    writeln!(out, "antenna_x_m: [{xs}]")?;
    writeln!(
        out,
        "final out-of-sample sum rate: {:.6} +/- {:.6} bit/s/Hz ({} draws)",
        rate.mean, rate.stderr, rate.count
    )?;
    writeln!(out, "wrote {}", dir.display())?;
    Ok(EXIT_OK)
}

fn emit_dry_run(
    out: &mut dyn Write,
    resolved: &[(String, String)],
    dir: &Path,
    files: &[&str],
) -> Result<()> {
    writeln!(out, "dry run: nothing written")?;
    for (k, v) in resolved {
        writeln!(out, "{k} = {v}")?;
    }
    for f in files {
        writeln!(out, "would write {}", dir.join(f).display())?;
    }
    Ok(())
}

fn prepare_dir(dir: &Path, files: &[&str], force: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    if !force {
        for f in files {
            let p = dir.join(f);
            if p.exists() {
                return Err(Error::OutputExists(p));
            }
        }
    }
    Ok(())
}

fn cmd_experiment(
    s: &Settings,
    id: ExperimentId,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    required_seed(s)?;
    let config = s.experiment(id)?;
    let dir = s
        .path("output-dir")
        .unwrap_or_else(|| PathBuf::from("pinchsim-out").join(id.as_str()));
    let mut resolved = config.entries();
    resolved.push(("output-dir".to_string(), dir.display().to_string()));
    echo(err, &resolved)?;
    if s.flag("dry-run")? {
        let files = experiments::planned_files(&config);
        let names: Vec<&str> = files.iter().map(String::as_str).collect();
        emit_dry_run(out, &resolved, &dir, &names)?;
        return Ok(EXIT_OK);
    }
    let force = s.flag("force")?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("{THREADS_ENV}: {e}")))?;
    let report = pool.install(|| experiments::run_experiment(&config, &dir, force))?;
    for f in &report.files {
        writeln!(out, "wrote {}", f.display())?;
    }
    writeln!(out, "wrote {}", report.manifest.display())?;
    Ok(EXIT_OK)
}

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

/// Self-checks of the closed forms against their independent oracles.
pub fn self_checks() -> Result<Vec<Check>> {
    let params = SystemParams::default();
    let mut checks = Vec::new();

    let mut worst_dx: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for &(ux, uy) in &[
        (25.0, 5.0),
        (3.0, -20.0),
        (49.0, 12.0),
        (0.5, 0.0),
        (40.0, -25.0),
    ] {
        let inst = SingleUserInstance::from_params(&params, ux, uy)?;
        let c = optimal_position_cardano(&inst)?;
        let o = oracle_position(&inst, ORACLE_GRID_STEP)?;
        worst_dx = worst_dx.max((c.antenna_x - o.antenna_x).abs());
        if c.antenna_x > 0.0 && c.antenna_x < inst.x_max {
            worst_res = worst_res.max(objective_g_prime(&inst, c.antenna_x).abs());
        }
    }
    checks.push(check(
        "cardano_matches_oracle",
        worst_dx <= 1e-3,
        format!("max |dx| = {worst_dx:.3e} m"),
    ));
    checks.push(check(
        "cardano_stationary",
        worst_res <= 1e-8,
        format!("max |g'| = {worst_res:.3e}"),
    ));

    let mut worst_rel: f64 = 0.0;
    for &(beta, side) in &[(0.1, 50.0), (0.01, 20.0), (1e-5, 10.0), (0.2, 1e4)] {
        let inputs = RateLossInputs::new(params.atten_alpha, beta, params.waveguide_height, side)?;
        let closed = expected_rate_loss(&inputs)?;
        let quad = quadrature_rate_loss(&inputs, QUADRATURE_TOL);
        worst_rel = worst_rel.max(((closed - quad) / quad).abs());
    }
    checks.push(check(
        "rate_loss_matches_quadrature",
        worst_rel <= 1e-10,
        format!("max rel = {worst_rel:.3e}"),
    ));

    let a = params.atten_alpha;
    let h = params.waveguide_height;
    let near_sparse = expected_rate_loss(&RateLossInputs::new(a, 1e-9, h, 50.0)?)?;
    let sparse = sparse_limit_rate_loss(a, h, 50.0);
    let rel_sparse = ((near_sparse - sparse) / sparse).abs();
    checks.push(check(
        "sparse_limit",
        rel_sparse <= 1e-5,
        format!("rel = {rel_sparse:.3e}"),
    ));
    let near_dense = expected_rate_loss(&RateLossInputs::new(a, 0.1, h, 1e7)?)?;
    let dense = dense_limit_rate_loss(a, 0.1)?;
    let rel_dense = ((near_dense - dense) / dense).abs();
    checks.push(check(
        "dense_limit",
        rel_dense <= 1e-4,
        format!("rel = {rel_dense:.3e}"),
    ));

    let mut worst_unit: f64 = 0.0;
    for x in [-110.0, 0.0, 40.0] {
        worst_unit = worst_unit.max((watts_to_dbm(dbm_to_watts(x)) - x).abs() / x.abs().max(1.0));
    }
    for x in [1e-4, 0.0092, 2.0] {
        worst_unit = worst_unit.max((db_per_m_to_alpha(alpha_to_db_per_m(x)) - x).abs() / x);
    }
    checks.push(check(
        "unit_round_trip",
        worst_unit <= 1e-12,
        format!("max rel = {worst_unit:.3e}"),
    ));

    let params = SystemParams {
        blockage_beta: 0.01,
        ..params
    };
    let mut rng = rng_from_seed(1);
    let users = (0..4)
        .map(|_| {
            let (x, y) = draw_user(&mut rng, params.region_side);
            Point3::ground(x, y)
        })
        .collect();
    let geom = MultiGeometry::centered(&params, 4, users, params.region_side)?;
    let samples = SampleSet::draw(&mut rng, &params, &geom, 20)?;
    let channels = sample_channels(&params, &geom, &samples)?;
    let zf = zf_beamformers(&channels, params.tx_power)?.beamformers;
    let zf_rate = empirical_sum_rate_channels(&channels, &zf, params.noise_power)?;
    let w = wmmse_beamformers(
        &zf,
        &channels,
        params.noise_power,
        params.tx_power,
        &Default::default(),
    )?;
    checks.push(check(
        "wmmse_improves_on_zf",
        zf_rate > 0.0
            && w.final_rate() >= zf_rate - 1e-9
            && w.beamformers.is_feasible(params.tx_power),
        format!("wmmse {:.4} vs zf {:.4} bit/s/Hz", w.final_rate(), zf_rate),
    ));
    Ok(checks)
}

fn cmd_validate(out: &mut dyn Write) -> Result<i32> {
    let checks = self_checks()?;
    let mut ok = true;
    for c in &checks {
        ok &= c.passed;
        writeln!(
            out,
            "{} {} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_RUNTIME })
}
