use pinchsim::experiments::{compute, ExperimentConfig, ExperimentId};
use pinchsim::multiuser::{PsoConfig, SaaConfig};

#[test]
fn fig1_gap_grows_with_side_when_sparse_and_vanishes_when_dense() {
    let mut c = ExperimentConfig::defaults(ExperimentId::Fig1RateVsD);
    c.master_seed = 12;
    let res = compute(&c).unwrap();
    let sides = ["10", "20", "30", "40", "50"];
    let gaps: Vec<_> = sides
        .iter()
        .map(|d| res.find(&["0.00001", d], "gap").unwrap().estimate)
        .collect();
    for w in gaps.windows(2) {
        let tol = 2.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        assert!(w[1].mean >= w[0].mean - tol, "{gaps:?}");
    }
    for d in sides {
        let g = res.find(&["0.1", d], "gap").unwrap().estimate;
        assert!(g.mean.abs() < 0.01, "D {d}: {g:?}");
    }
}

#[test]
fn fig2_pinching_never_loses_to_fixed() {
    let mut c = ExperimentConfig::defaults(ExperimentId::Fig2Surface);
    c.master_seed = 8;
    c.trials = 2000;
    let res = compute(&c).unwrap();
    let gaps: Vec<_> = res.summary.iter().filter(|r| r.scheme == "gap").collect();
    assert_eq!(gaps.len(), 30);
    for r in gaps {
        assert!(r.estimate.mean >= -2.0 * r.estimate.stderr, "{r:?}");
    }
    for r in res.summary.iter().filter(|r| r.scheme == "relative_gap") {
        let pin = res
            .find(&[&r.grid_values[0], &r.grid_values[1]], "pinching")
            .unwrap()
            .estimate
            .mean;
        let fix = res
            .find(&[&r.grid_values[0], &r.grid_values[1]], "fixed")
            .unwrap()
            .estimate
            .mean;
        assert!((r.estimate.mean - (pin - fix) / pin).abs() < 1e-12);
    }
}

#[test]
fn disjoint_seed_ranges_give_overlapping_intervals() {
    let mut c = ExperimentConfig::defaults(ExperimentId::Fig5RateVsBeta);
    c.trials = 8;
    c.betas = vec![0.01];
    c.powers_dbm = vec![40.0];
    c.saa = SaaConfig {
        num_samples: 10,
        max_outer_iters: 3,
        num_eval_samples: 500,
        ..c.saa
    };
    c.pso = PsoConfig {
        swarm_size: 8,
        max_iters: 8,
        ..c.pso
    };
    let runs: Vec<_> = [100, 200]
        .into_iter()
        .map(|seed| {
            c.master_seed = seed;
            compute(&c).unwrap()
        })
        .collect();
    for scheme in ["pinching", "fixed"] {
        let a = runs[0]
            .find(&["0.01", "40", "50"], scheme)
            .unwrap()
            .estimate;
        let b = runs[1]
            .find(&["0.01", "40", "50"], scheme)
            .unwrap()
            .estimate;
        assert_ne!(a.mean, b.mean);
        // 2-se intervals overlap
        assert!(
            (a.mean - b.mean).abs() <= 2.0 * (a.stderr + b.stderr),
            "{scheme}: {a:?} {b:?}"
        );
    }
}

#[test]
fn seed_column_is_the_grid_seed_and_rows_carry_trial_seeds() {
    let mut c = ExperimentConfig::defaults(ExperimentId::Fig3Cdf);
    c.master_seed = 3;
    c.trials = 10;
    let res = compute(&c).unwrap();
    let seeds: std::collections::HashSet<u64> = res.trials.iter().map(|t| t.trial_seed).collect();
    assert_eq!(seeds.len(), res.trials.len());
    for r in &res.summary {
        assert_eq!(r.grid_seed, pinchsim::seed::grid_seed(3, r.grid_index));
    }
}
