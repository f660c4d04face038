//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use pinchsim::experiments::{self, cdf, ExperimentConfig, ExperimentId, RunManifest};
use pinchsim::model::{MultiGeometry, Point3, SystemParams};
use pinchsim::multiuser::{
    sample_channels, wmmse_beamformers, zf_beamformers, PsoConfig, SaaConfig, SampleSet,
    WmmseConfig,
};
use pinchsim::rate_analysis::{
    dense_limit_rate_loss, expected_rate_loss, monte_carlo_rate_loss, quadrature_rate_loss,
    sparse_limit_rate_loss, RateLossInputs, QUADRATURE_TOL,
};
use pinchsim::seed::rng_from_seed;
use pinchsim::single_user::{
    convexity_holds, draw_user, objective_g_second, optimal_position_cardano, oracle_position,
    SingleUserInstance,
};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn run(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let passed = o.passed && in_time;
    let budget = limit
        .map(|l| format!(" / {}s", l.as_secs()))
        .unwrap_or_default();
    println!(
        "{} criterion {id:>2} {name}: {} [{:.2}s{budget}]",
        if passed { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64()
    );
    passed
}

fn cardano_vs_oracle() -> Outcome {
    let mut rng = rng_from_seed(0xC0FFEE);
    let mut count = 0;
    let mut worst_dx: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    while count < 1000 {
        let beta = rng.random_range(0.05..=1.0);
        let height = rng.random_range(3.2..=15.0);
        if beta * height * height < 1.0 {
            continue;
        }
        let alpha = rng.random_range(0.0..=0.05);
        let side = rng.random_range(10.0..=100.0);
        let (ux, uy) = draw_user(&mut rng, side);
        let inst = SingleUserInstance::new(ux, uy, height, alpha, beta, side).unwrap();
        let c = optimal_position_cardano(&inst).unwrap();
        let o = oracle_position(&inst, 1e-3).unwrap();
        worst_dx = worst_dx.max((c.antenna_x - o.antenna_x).abs());
        if c.antenna_x > 0.0 && c.antenna_x < inst.x_max {
            let d = c.offset_delta;
            let cc = inst.c;
            let r = beta * d.powi(3) - alpha * d * d + (beta * cc + 1.0) * d - alpha * cc;
            worst_res = worst_res.max(r.abs() / (1.0 + beta * cc));
        }
        count += 1;
    }
    outcome(
        worst_dx <= 1e-3 && worst_res <= 1e-8,
        format!("1000 instances, max |dx| = {worst_dx:.2e} m, max stationarity residual = {worst_res:.2e}"),
    )
}

fn closed_form_vs_quadrature() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for alpha in [0.001, 0.005, 0.0092, 0.02, 0.05] {
        for beta in [1e-4, 1e-2, 0.1, 0.5, 1.0] {
            for height in [3.0, 10.0] {
                for side in [10.0, 1000.0] {
                    let inputs = RateLossInputs::new(alpha, beta, height, side).unwrap();
                    let closed = expected_rate_loss(&inputs).unwrap();
                    let quad = quadrature_rate_loss(&inputs, QUADRATURE_TOL);
                    worst = worst.max(((closed - quad) / quad).abs());
                    n += 1;
                }
            }
        }
    }
    outcome(
        worst <= 1e-10,
        format!("{n} grid points, max relative difference = {worst:.2e}"),
    )
}

fn dense_limit_constant() -> Outcome {
    let dense = dense_limit_rate_loss(0.0092, 0.1).unwrap();
    let at = expected_rate_loss(&RateLossInputs::new(0.0092, 0.1, 10.0, 1e4).unwrap()).unwrap();
    let rounded = format!("{dense:.2e}");
    let close = ((at - dense) / dense).abs();
    outcome(
        (dense - 0.00122).abs() < 5e-6 && rounded == "1.22e-3" && close <= 0.05,
        format!(
            "limit = {dense:.6e} (~{rounded}), D = 1e4 value {at:.6e}, {:.3}% from limit",
            100.0 * close
        ),
    )
}

fn sparse_limit() -> Outcome {
    let mut worst: f64 = 0.0;
    for side in [10.0, 50.0, 100.0] {
        let closed =
            expected_rate_loss(&RateLossInputs::new(0.0092, 1e-9, 10.0, side).unwrap()).unwrap();
        let limit = sparse_limit_rate_loss(0.0092, 10.0, side);
        worst = worst.max(((closed - limit) / limit).abs());
    }
    outcome(
        worst <= 1e-3,
        format!("max relative difference = {worst:.2e}"),
    )
}

fn monte_carlo_vs_closed_form() -> Outcome {
    // the closed form is the high-SNR loss; evaluate the simulation in that regime
    let params = SystemParams {
        atten_alpha: 0.0092,
        blockage_beta: 0.1,
        waveguide_height: 10.0,
        region_side: 50.0,
        tx_power: 1e50,
        ..SystemParams::default()
    };
    let closed = expected_rate_loss(&RateLossInputs::from_params(&params)).unwrap();
    let mc = monte_carlo_rate_loss(&params, 10_000, &mut rng_from_seed(5)).unwrap();
    let z = (mc.mean - closed).abs() / mc.stderr;
    let realistic = SystemParams {
        tx_power: SystemParams::default().tx_power,
        ..params
    };
    let low = monte_carlo_rate_loss(&realistic, 10_000, &mut rng_from_seed(5)).unwrap();
    outcome(
        z <= 3.0,
        format!(
            "high-SNR MC {:.6e} +/- {:.1e} vs closed form {closed:.6e} ({z:.2} se); at 40 dBm MC = {:.3e}",
            mc.mean, mc.stderr, low.mean
        ),
    )
}

fn convexity_suite() -> Outcome {
    let mut rng = rng_from_seed(66);
    let mut checked = 0;
    let mut violations = 0;
    while checked < 100_000 {
        let beta = rng.random_range(0.01..=1.0);
        let height = rng.random_range(1.0..=20.0);
        if beta * height * height < 1.0 {
            continue;
        }
        let alpha = rng.random_range(0.0..=0.05);
        let side = rng.random_range(10.0..=100.0);
        let (ux, uy) = draw_user(&mut rng, side);
        let inst = SingleUserInstance::new(ux, uy, height, alpha, beta, side).unwrap();
        debug_assert!(convexity_holds(&inst));
        let x = rng.random_range(0.0..=side);
        let g2 = objective_g_second(&inst, x);
        if g2 <= 0.0 || g2.is_nan() {
            violations += 1;
        }
        checked += 1;
    }
    // non-convex regime: scan for a point of negative curvature
    let mut found = None;
    'search: for _ in 0..10_000 {
        let height = rng.random_range(1.0..=20.0);
        let beta = rng.random_range(0.0..1.0) / (height * height);
        let side = rng.random_range(10.0..=100.0);
        let (ux, uy) = draw_user(&mut rng, side);
        let inst = SingleUserInstance::new(ux, uy, height, 0.0092, beta, side).unwrap();
        for k in 0..=1000 {
            let x = side * k as f64 / 1000.0;
            let g2 = objective_g_second(&inst, x);
            if g2 < 0.0 {
                found = Some((inst, x, g2));
                break 'search;
            }
        }
    }
    let detail = match &found {
        Some((i, x, g2)) => format!(
            "counterexample beta = {:.5}, d_v = {:.4}, user = ({:.4}, {:.4}), D = {:.3}: g''({x:.4}) = {g2:.3e}",
            i.beta, i.height, i.user_x, i.user_y, i.x_max
        ),
        None => "no counterexample found".to_string(),
    };
    outcome(
        violations == 0 && found.is_some(),
        format!("{checked} convex pairs, {violations} with g'' <= 0; {detail}"),
    )
}

fn wmmse_monotone() -> Outcome {
    let params = SystemParams {
        blockage_beta: 0.01,
        ..SystemParams::default()
    };
    let cfg = WmmseConfig {
        tol: 0.0,
        max_iters: 30,
    };
    let mut worst: f64 = 0.0;
    let mut sweeps = 0;
    for seed in 0..50 {
        let mut rng = rng_from_seed(seed);
        let users = (0..4)
            .map(|_| {
                let (x, y) = draw_user(&mut rng, params.region_side);
                Point3::ground(x, y)
            })
            .collect();
        let geom = MultiGeometry::centered(&params, 4, users, params.region_side).unwrap();
        let samples = SampleSet::draw(&mut rng, &params, &geom, 20).unwrap();
        let channels = sample_channels(&params, &geom, &samples).unwrap();
        let init = zf_beamformers(&channels, params.tx_power)
            .unwrap()
            .beamformers;
        let out =
            wmmse_beamformers(&init, &channels, params.noise_power, params.tx_power, &cfg).unwrap();
        for w in out.trajectory.windows(2) {
            let drop = (w[0] - w[1]) / w[0].abs().max(f64::MIN_POSITIVE);
            worst = worst.max(drop);
            sweeps += 1;
        }
    }
    outcome(
        worst <= 1e-9,
        format!("50 sample sets, {sweeps} sweeps, largest relative decrease = {worst:.2e}"),
    )
}

fn multi_user(id: ExperimentId, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(id);
    c.master_seed = seed;
    c.trials = 50;
    c.num_users = 4;
    c.num_waveguides = 4;
    c
}

fn wmmse_beats_zf() -> Outcome {
    let mut c = multi_user(ExperimentId::Fig4WmmseVsZf, 2024);
    c.betas = vec![0.01];
    c.sides = vec![50.0];
    c.powers_dbm = vec![30.0, 35.0, 40.0];
    let res = experiments::compute(&c).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    let mut total = 0.0;
    for p in ["30", "35", "40"] {
        let key = ["0.01", "50", p];
        let w = res.find(&key, "wmmse").unwrap().estimate;
        let z = res.find(&key, "zf").unwrap().estimate;
        let gap = res.find(&key, "gap").unwrap().estimate;
        ok &= w.mean >= z.mean && gap.mean >= -2.0 * gap.stderr;
        total += gap.mean;
        parts.push(format!(
            "{p} dBm: {:.3} vs {:.3} (gap {:.3} +/- {:.3})",
            w.mean, z.mean, gap.mean, gap.stderr
        ));
    }
    outcome(
        ok && total > 0.0,
        format!("{}; mean gap {:.3}", parts.join("; "), total / 3.0),
    )
}

fn pinching_beats_fixed() -> Outcome {
    let mut c = multi_user(ExperimentId::Fig5RateVsBeta, 77);
    c.betas = vec![0.01, 0.05, 0.1, 0.2];
    c.sides = vec![10.0, 30.0, 50.0];
    c.powers_dbm = vec![40.0];
    let res = experiments::compute(&c).unwrap();
    let mut failures = Vec::new();
    for b in ["0.01", "0.05", "0.1", "0.2"] {
        for d in ["10", "30", "50"] {
            let gap = res.find(&[b, "40", d], "gap").unwrap().estimate;
            if gap.mean < -2.0 * gap.stderr {
                failures.push(format!(
                    "beta {b} D {d}: gap {:.4} +/- {:.4}",
                    gap.mean, gap.stderr
                ));
            }
        }
    }
    let gaps: Vec<_> = ["10", "30", "50"]
        .iter()
        .map(|d| res.find(&["0.05", "40", d], "gap").unwrap().estimate)
        .collect();
    for (d, w) in ["10->30", "30->50"].iter().zip(gaps.windows(2)) {
        let tol = 2.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        if w[1].mean < w[0].mean - tol {
            failures.push(format!(
                "beta 0.05 gap decreases {d}: {:.4} -> {:.4} (tol {tol:.4})",
                w[0].mean, w[1].mean
            ));
        }
    }
    let trend = gaps
        .iter()
        .map(|g| format!("{:.3}+/-{:.3}", g.mean, g.stderr))
        .collect::<Vec<_>>()
        .join(", ");
    let detail = if failures.is_empty() {
        format!("12 grid points non-negative; beta 0.05 gaps over D = 10, 30, 50: {trend}")
    } else {
        format!("{}; beta 0.05 gaps: {trend}", failures.join("; "))
    };
    outcome(failures.is_empty(), detail)
}

fn cdf_left_shift() -> Outcome {
    let mut c = ExperimentConfig::defaults(ExperimentId::Fig3Cdf);
    c.master_seed = 31;
    c.trials = 1000;
    c.betas = vec![0.05, 0.1];
    c.sides = vec![20.0];
    let res = experiments::compute(&c).unwrap();
    let all: Vec<f64> = res.trials.iter().flat_map(|t| t.values.clone()).collect();
    let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let th = cdf::thresholds(lo, hi, c.cdf_points).unwrap();
    let table = |g: usize, s: &str| cdf::cdf_at(&res.samples(g, s), &th).unwrap();
    // grid index 0 is beta 0.05, index 1 is beta 0.1
    let weakly_above = |upper: &[cdf::CdfPoint], lower: &[cdf::CdfPoint]| {
        upper
            .iter()
            .zip(lower)
            .map(|(u, l)| {
                (l.probability - u.probability) - 2.0 * (u.stderr.powi(2) + l.stderr.powi(2)).sqrt()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let beta_shift = weakly_above(&table(1, "pinching"), &table(0, "pinching"));
    let pin_vs_fix = (0..2)
        .map(|g| weakly_above(&table(g, "fixed"), &table(g, "pinching")))
        .fold(f64::NEG_INFINITY, f64::max);
    outcome(
        beta_shift <= 0.0 && pin_vs_fix <= 0.0,
        format!(
            "{} thresholds; worst excess over 2 se: beta shift {beta_shift:.3}, pinching vs fixed {pin_vs_fix:.3}",
            th.len()
        ),
    )
}

fn tiny(id: ExperimentId) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(id);
    c.master_seed = 99;
    c.trials = if id.is_single_user() { 200 } else { 3 };
    c.saa = SaaConfig {
        num_samples: 5,
        max_outer_iters: 2,
        num_eval_samples: 200,
        ..c.saa
    };
    c.pso = PsoConfig {
        swarm_size: 5,
        max_iters: 5,
        ..c.pso
    };
    if id == ExperimentId::Fig6RateVsM {
        c.user_counts = vec![2, 4];
    }
    c
}

fn reproducibility() -> Outcome {
    let mut mismatches = Vec::new();
    let mut files = 0;
    for id in ExperimentId::ALL {
        let c = tiny(id);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = experiments::run_experiment(&c, a.path(), false).unwrap();
        let rb = experiments::run_experiment(&c, b.path(), false).unwrap();
        let ma = RunManifest::read(&ra.manifest).unwrap().checksums();
        let mb = RunManifest::read(&rb.manifest).unwrap().checksums();
        files += ma.len();
        let bytes_equal = ra
            .files
            .iter()
            .zip(&rb.files)
            .all(|(x, y)| std::fs::read(x).unwrap() == std::fs::read(y).unwrap());
        if ma != mb || ma.is_empty() || !bytes_equal {
            mismatches.push(id.as_str());
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("6 experiments rerun, {files} files with matching checksums")
        } else {
            format!("mismatched: {}", mismatches.join(", "))
        },
    )
}

fn main() {
    // `cargo test -- <filter>` style arguments are accepted and ignored
    let s = Duration::from_secs;
    let results = [
        run(1, "cardano vs oracle", Some(s(10)), cardano_vs_oracle),
        run(
            2,
            "closed-form rate loss vs quadrature",
            Some(s(5)),
            closed_form_vs_quadrature,
        ),
        run(3, "dense-limit constant", None, dense_limit_constant),
        run(4, "sparse-blockage limit", None, sparse_limit),
        run(
            5,
            "Monte Carlo vs closed-form rate loss",
            Some(s(30)),
            monte_carlo_vs_closed_form,
        ),
        run(6, "objective curvature", None, convexity_suite),
        run(7, "WMMSE monotonicity", None, wmmse_monotone),
        run(8, "WMMSE >= ZF", Some(s(600)), wmmse_beats_zf),
        run(9, "pinching >= fixed", Some(s(1200)), pinching_beats_fixed),
        run(10, "CDF left-shift", Some(s(60)), cdf_left_shift),
        run(11, "reproducibility", None, reproducibility),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
