//! Run a reduced pinching-vs-fixed sweep and write its CSVs and manifest.
//!
//! Usage: `cargo run --example experiment_sweep -- [output-dir]`

use pinchsim::experiments::{run_experiment, ExperimentConfig, ExperimentId};

fn main() -> pinchsim::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "pinchsim-out/example-fig5".into());
    let mut config = ExperimentConfig::defaults(ExperimentId::Fig5RateVsBeta);
    config.master_seed = 2025;
    config.trials = 10;
    config.powers_dbm = vec![40.0];

    let report = run_experiment(&config, dir.as_ref(), true)?;
    for row in report.results.summary.iter().filter(|r| r.scheme != "gap") {
        println!(
            "beta {:>5}  {:<8} {:.4} +/- {:.4}",
            row.grid_values[0], row.scheme, row.estimate.mean, row.estimate.stderr
        );
    }
    println!("manifest: {}", report.manifest.display());
    Ok(())
}
