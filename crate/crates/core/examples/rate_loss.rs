//! Average rate loss from placing the antenna directly above the user, as the
//! region grows.

use pinchsim::rate_analysis::{
    dense_limit_rate_loss, expected_rate_loss, quadrature_rate_loss, sparse_limit_rate_loss,
    RateLossInputs, QUADRATURE_TOL,
};

fn main() -> pinchsim::Result<()> {
    let (alpha, beta, height) = (0.0092, 0.1, 10.0);
    println!("dense limit: {:.6e}", dense_limit_rate_loss(alpha, beta)?);
    println!(
        "{:>8} {:>14} {:>14} {:>14}",
        "D", "closed form", "quadrature", "sparse limit"
    );
    for side in [10.0, 50.0, 100.0, 1e3, 1e4] {
        let inputs = RateLossInputs::new(alpha, beta, height, side)?;
        println!(
            "{side:>8} {:>14.6e} {:>14.6e} {:>14.6e}",
            expected_rate_loss(&inputs)?,
            quadrature_rate_loss(&inputs, QUADRATURE_TOL),
            sparse_limit_rate_loss(alpha, height, side)
        );
    }
    Ok(())
}
