//! WMMSE refinement of zero-forcing beamformers on one blockage sample set.

use pinchsim::model::{MultiGeometry, Point3};
use pinchsim::multiuser::{
    empirical_sum_rate_channels, sample_channels, wmmse_beamformers, zf_beamformers, SampleSet,
    WmmseConfig,
};
use pinchsim::seed::rng_from_seed;
use pinchsim::SystemParams;

fn main() -> pinchsim::Result<()> {
    let params = SystemParams {
        blockage_beta: 0.01,
        ..SystemParams::default()
    };
    let users = vec![
        Point3::ground(12.0, -20.0),
        Point3::ground(30.0, -5.0),
        Point3::ground(41.0, 9.0),
        Point3::ground(22.0, 21.0),
    ];
    let geom = MultiGeometry::centered(&params, 4, users, params.region_side)?;
    let mut rng = rng_from_seed(7);
    let samples = SampleSet::draw(&mut rng, &params, &geom, 50)?;
    let channels = sample_channels(&params, &geom, &samples)?;

    let zf = zf_beamformers(&channels, params.tx_power)?;
    let zf_rate = empirical_sum_rate_channels(&channels, &zf.beamformers, params.noise_power)?;
    let out = wmmse_beamformers(
        &zf.beamformers,
        &channels,
        params.noise_power,
        params.tx_power,
        &WmmseConfig::default(),
    )?;
    println!(
        "zf: {zf_rate:.4} bit/s/Hz (regularized: {})",
        zf.regularized
    );
    for (k, r) in out.trajectory.iter().enumerate() {
        println!("wmmse sweep {k:>2}: {r:.4}");
    }
    println!(
        "power used: {:.3} of {:.3} W",
        out.beamformers.total_power(),
        params.tx_power
    );
    Ok(())
}
