//! Compare the placement rules for one user of the single-waveguide layout.

use pinchsim::single_user::{
    approx_position, convexity_holds, optimal_position_cardano, oracle_position,
    position_ignoring_attenuation, rate_at, RateMetric, SingleUserInstance, ORACLE_GRID_STEP,
};
use pinchsim::SystemParams;

fn main() -> pinchsim::Result<()> {
    let params = SystemParams::default();
    let (ux, uy) = (40.0, 8.0);
    let inst = SingleUserInstance::from_params(&params, ux, uy)?;
    println!("convex: {}", convexity_holds(&inst));

    let rows = [
        ("cardano", optimal_position_cardano(&inst)?),
        ("approximate", approx_position(&inst)),
        ("ignore_attenuation", position_ignoring_attenuation(&inst)),
        ("oracle", oracle_position(&inst, ORACLE_GRID_STEP)?),
    ];
    for (name, r) in rows {
        let rate = rate_at(&params, ux, uy, r.antenna_x, RateMetric::MeanSnr)?;
        println!(
            "{name:<20} x = {:.6} m  g = {:.8}  rate = {rate:.6} bit/s/Hz",
            r.antenna_x, r.objective_g
        );
    }
    Ok(())
}
