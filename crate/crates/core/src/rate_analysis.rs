//! Average rate loss from ignoring in-waveguide attenuation when placing a
//! single pinching antenna.
//!
//! All outputs are in bits/s/Hz. The closed forms compare the small-offset
//! placement `x_u - alpha C/(1 + beta C)` against the antenna directly above
//! the user, in the high-SNR regime, for `y_u ~ U(-D/2, D/2)`.

use std::f64::consts::LN_2;

use rand::Rng;

use crate::error::{ensure_finite, Error, Result};
use crate::model::SystemParams;
use crate::single_user::{
    approx_position, draw_user, objective_g, position_ignoring_attenuation, rate_at, RateMetric,
    SingleUserInstance,
};
use crate::stats::MeanEstimate;

/// Tolerance of the quadrature oracle, relative to the peak integrand value.
pub const QUADRATURE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLossInputs {
    pub alpha: f64,
    pub beta: f64,
    /// Waveguide height `d_v` (m).
    pub height: f64,
    /// Region side `D` (m).
    pub side: f64,
}

impl RateLossInputs {
    pub fn new(alpha: f64, beta: f64, height: f64, side: f64) -> Result<Self> {
        for (name, v) in [
            ("alpha", alpha),
            ("beta", beta),
            ("height", height),
            ("side", side),
        ] {
            ensure_finite(name, v)?;
            if v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        Ok(Self {
            alpha,
            beta,
            height,
            side,
        })
    }

    pub fn from_params(params: &SystemParams) -> Self {
        Self {
            alpha: params.atten_alpha,
            beta: params.blockage_beta,
            height: params.waveguide_height,
            side: params.region_side,
        }
    }

    /// `E = 1 + beta d_v^2`.
    pub fn e(&self) -> f64 {
        1.0 + self.beta * self.height * self.height
    }

    /// `z = sqrt(beta) D / (2 sqrt(E))`.
    pub fn z(&self) -> f64 {
        self.beta.sqrt() * self.side / (2.0 * self.e().sqrt())
    }
}

/// Per-user loss `alpha^2 C / ((1 + beta C) ln 2)`.
pub fn instantaneous_rate_loss(c: f64, alpha: f64, beta: f64) -> f64 {
    alpha * alpha * c / ((1.0 + beta * c) * LN_2)
}

/// High-SNR loss without the small-offset simplification:
/// `log2(C/(delta^2 + C)) - beta delta^2/ln 2 + 2 alpha delta/ln 2`.
pub fn exact_instantaneous_rate_loss(c: f64, alpha: f64, beta: f64) -> f64 {
    let delta = alpha * c / (1.0 + beta * c);
    (-(delta * delta / c).ln_1p() - beta * delta * delta + 2.0 * alpha * delta) / LN_2
}

/// `1 - atan(z)/z`, accurate for small `z`.
fn one_minus_atan_ratio(z: f64) -> f64 {
    if z < 1e-2 {
        let z2 = z * z;
        z2 * (1.0 / 3.0 - z2 * (1.0 / 5.0 - z2 * (1.0 / 7.0 - z2 / 9.0)))
    } else {
        1.0 - z.atan() / z
    }
}

/// Closed-form average loss
/// `(alpha^2/(beta ln 2)) [1 - 2 atan(z) / (D sqrt(beta E))]`.
///
/// The bracket is evaluated as `(beta d_v^2 + 1 - atan(z)/z) / E`, which is
/// the same quantity without cancellation at small `beta`.
pub fn expected_rate_loss(inputs: &RateLossInputs) -> Result<f64> {
    let RateLossInputs {
        alpha,
        beta,
        height,
        side,
    } = *inputs;
    if !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "expected_rate_loss requires beta > 0 (got {beta}); use sparse_limit_rate_loss"
        )));
    }
    if side == 0.0 {
        return Ok(instantaneous_rate_loss(height * height, alpha, beta));
    }
    let e = inputs.e();
    let bracket = (beta * height * height + one_minus_atan_ratio(inputs.z())) / e;
    Ok(alpha * alpha / (beta * LN_2) * bracket)
}

/// `beta -> 0` limit: `(alpha^2/ln 2)(D^2/12 + d_v^2)`.
pub fn sparse_limit_rate_loss(alpha: f64, height: f64, side: f64) -> f64 {
    alpha * alpha / LN_2 * (side * side / 12.0 + height * height)
}

/// `D -> infinity` limit: `alpha^2/(beta ln 2)`.
pub fn dense_limit_rate_loss(alpha: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "dense limit requires beta > 0, got {beta}"
        )));
    }
    Ok(alpha * alpha / (beta * LN_2))
}

/// Closed form when `beta > 0`, sparse limit when `beta == 0`.
pub fn average_rate_loss(inputs: &RateLossInputs) -> f64 {
    if inputs.beta == 0.0 {
        sparse_limit_rate_loss(inputs.alpha, inputs.height, inputs.side)
    } else {
        expected_rate_loss(inputs).expect("beta > 0")
    }
}

/// Adaptive Simpson quadrature of `(1/D) int_{-D/2}^{D/2} dR(y^2 + d_v^2) dy`.
/// `tol` is relative to the largest integrand value on the interval.
pub fn quadrature_rate_loss(inputs: &RateLossInputs, tol: f64) -> f64 {
    let RateLossInputs {
        alpha,
        beta,
        height,
        side,
    } = *inputs;
    let f = |y: f64| instantaneous_rate_loss(y * y + height * height, alpha, beta);
    if side == 0.0 {
        return f(0.0);
    }
    let half = side / 2.0;
    // the integrand increases with |y|, so f(D/2) is its peak
    let scale = f(half).max(f(0.0));
    if scale == 0.0 {
        return 0.0;
    }
    // symmetric integrand: (2/D) int_0^{D/2}
    2.0 / side * adaptive_simpson(&f, 0.0, half, tol * scale * half)
}

pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Per-user samples of `rate(approx placement) - rate(antenna above user)`,
/// both evaluated with attenuation, for uniformly placed users.
pub fn monte_carlo_rate_loss_samples<R: Rng + ?Sized>(
    params: &SystemParams,
    num_users: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    params.validate()?;
    if num_users == 0 {
        return Err(Error::InvalidArgument("num_users must be >= 1".into()));
    }
    (0..num_users)
        .map(|_| {
            let (x, y) = draw_user(rng, params.region_side);
            let inst = SingleUserInstance::from_params(params, x, y)?;
            let with = approx_position(&inst).antenna_x;
            let without = position_ignoring_attenuation(&inst).antenna_x;
            Ok(rate_at(params, x, y, with, RateMetric::MeanSnr)?
                - rate_at(params, x, y, without, RateMetric::MeanSnr)?)
        })
        .collect()
}

pub fn monte_carlo_rate_loss<R: Rng + ?Sized>(
    params: &SystemParams,
    num_users: usize,
    rng: &mut R,
) -> Result<MeanEstimate> {
    Ok(MeanEstimate::from_samples(&monte_carlo_rate_loss_samples(
        params, num_users, rng,
    )?))
}

/// `rho -> infinity` per-user loss, `(g(above user) - g(approx)) / ln 2`.
pub fn high_snr_loss(inst: &SingleUserInstance) -> f64 {
    let with = approx_position(inst).antenna_x;
    let without = position_ignoring_attenuation(inst).antenna_x;
    (objective_g(inst, without) - objective_g(inst, with)) / LN_2
}
