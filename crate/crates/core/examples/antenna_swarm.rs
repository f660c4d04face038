//! Move one pinching antenna by particle swarm search with the beamformers
//! held fixed.

use pinchsim::model::{MultiGeometry, Point3};
use pinchsim::multiuser::{
    pso_optimize_antenna, sample_channels, zf_beamformers, PsoConfig, SampleSet,
};
use pinchsim::seed::rng_from_seed;
use pinchsim::SystemParams;

fn main() -> pinchsim::Result<()> {
    let params = SystemParams {
        blockage_beta: 0.01,
        ..SystemParams::default()
    };
    let users = vec![Point3::ground(8.0, -15.0), Point3::ground(35.0, 12.0)];
    let geom = MultiGeometry::centered(&params, 2, users, params.region_side)?;
    let mut rng = rng_from_seed(3);
    let samples = SampleSet::draw(&mut rng, &params, &geom, 40)?;
    let v =
        zf_beamformers(&sample_channels(&params, &geom, &samples)?, params.tx_power)?.beamformers;

    let out = pso_optimize_antenna(
        0,
        &v,
        &samples,
        &geom,
        &params,
        &PsoConfig::default(),
        &mut rng,
    )?;
    println!(
        "antenna 0: {:.3} m -> {:.3} m",
        geom.antenna_x[0], out.position
    );
    println!(
        "fitness: {:.4} -> {:.4}",
        out.incumbent_fitness, out.fitness
    );
    Ok(())
}
