//! Joint antenna placement and beamforming for four users, against antennas
//! parked at the centre.

use pinchsim::model::{MultiGeometry, Point3};
use pinchsim::multiuser::{
    dynamic_saa, evaluate_average_rate, fixed_antenna_outcome, BeamformerMode, PsoConfig, SaaConfig,
};
use pinchsim::seed::rng_from_seed;
use pinchsim::single_user::draw_user;
use pinchsim::SystemParams;

fn main() -> pinchsim::Result<()> {
    let params = SystemParams {
        blockage_beta: 0.01,
        ..SystemParams::default()
    };
    let mut rng = rng_from_seed(2);
    let users: Vec<Point3> = (0..4)
        .map(|_| {
            let (x, y) = draw_user(&mut rng, params.region_side);
            Point3::ground(x, y)
        })
        .collect();
    let geom = MultiGeometry::centered(&params, 4, users, params.region_side)?;
    let saa = SaaConfig {
        num_samples: 40,
        max_outer_iters: 8,
        num_eval_samples: 5000,
        ..SaaConfig::default()
    };
    let pso = PsoConfig::default();

    let moved = dynamic_saa(
        &geom,
        &params,
        &saa,
        &pso,
        BeamformerMode::Wmmse,
        &mut rng_from_seed(10),
    )?;
    for it in &moved.trajectory {
        println!(
            "iter {:>2}: {:.4} bit/s/Hz  x = {:.2?}",
            it.iteration, it.objective, it.antenna_x
        );
    }
    let parked = fixed_antenna_outcome(
        &geom,
        &params,
        &saa,
        BeamformerMode::Wmmse,
        &mut rng_from_seed(11),
    )?;

    for (name, o) in [("pinching", &moved), ("fixed", &parked)] {
        let mut at = geom.clone();
        at.set_antenna_x(&o.antenna_x)?;
        let r = evaluate_average_rate(
            &at,
            &o.beamformers,
            &params,
            saa.num_eval_samples,
            &mut rng_from_seed(99),
        )?;
        println!("{name:<9} {:.4} +/- {:.4} bit/s/Hz", r.mean, r.stderr);
    }
    Ok(())
}
