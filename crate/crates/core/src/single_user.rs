//! Single-user pinching-antenna placement.
//!
//! Maximising the blockage-averaged SNR is the same as minimising
//!
//! ```text
//! g(x) = beta (delta^2 + C) + ln(delta^2 + C) + 2 alpha x,   delta = x_u - x
//! ```
//!
//! over `0 <= x <= x_max`, where `C = y_u^2 + d_v^2`. When `beta d_v^2 >= 1`
//! the objective is strictly convex and its stationary point is the single
//! real root of a cubic, available in closed form.

use rand::Rng;

use crate::cubic::{cardano_depressed, real_roots};
use crate::error::{ensure_finite, Error, Result};
use crate::model::{expected_channel_gain, Point3, SystemParams};
use crate::search::{bisect_root, golden_section_minimize};
use crate::stats::MeanEstimate;

/// Grid step of the brute-force oracle (m).
pub const ORACLE_GRID_STEP: f64 = 1e-4;
/// Width of the golden-section bracket at which oracle refinement stops (m).
pub const ORACLE_REFINE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleUserInstance {
    pub user_x: f64,
    pub user_y: f64,
    /// Waveguide height `d_v` (m).
    pub height: f64,
    /// `y_u^2 + d_v^2` (m^2).
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub x_max: f64,
}

impl SingleUserInstance {
    pub fn new(
        user_x: f64,
        user_y: f64,
        height: f64,
        alpha: f64,
        beta: f64,
        x_max: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("user_x", user_x),
            ("user_y", user_y),
            ("height", height),
            ("alpha", alpha),
            ("beta", beta),
            ("x_max", x_max),
        ] {
            ensure_finite(name, v)?;
        }
        if height <= 0.0 {
            return Err(Error::InvalidArgument("height must be > 0".into()));
        }
        if alpha < 0.0 || beta < 0.0 {
            return Err(Error::InvalidArgument("alpha and beta must be >= 0".into()));
        }
        if x_max < 0.0 {
            return Err(Error::InvalidArgument("x_max must be >= 0".into()));
        }
        Ok(Self {
            user_x,
            user_y,
            height,
            c: user_y * user_y + height * height,
            alpha,
            beta,
            x_max,
        })
    }

    /// Instance for a user at `(user_x, user_y)` with `x_max = D`.
    pub fn from_params(params: &SystemParams, user_x: f64, user_y: f64) -> Result<Self> {
        Self::new(
            user_x,
            user_y,
            params.waveguide_height,
            params.atten_alpha,
            params.blockage_beta,
            params.default_x_max(),
        )
    }

    fn clip(&self, x: f64) -> f64 {
        x.clamp(0.0, self.x_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlacementMethod {
    Cardano,
    /// Negative Cardano discriminant: the stationary point was found by
    /// bisection on `g'`.
    CardanoBisection,
    /// Non-convex instance: global minimum over all real stationary points
    /// and the interval ends.
    ExactRoots,
    Approximate,
    IgnoreAttenuation,
    FixedCenter,
    Oracle,
}

impl PlacementMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Cardano => "cardano",
            Self::CardanoBisection => "cardano_bisection",
            Self::ExactRoots => "exact_roots",
            Self::Approximate => "approximate",
            Self::IgnoreAttenuation => "ignore_attenuation",
            Self::FixedCenter => "fixed_center",
            Self::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementResult {
    pub antenna_x: f64,
    /// `user_x - antenna_x` before clipping to `[0, x_max]`.
    pub offset_delta: f64,
    /// `g` evaluated at the clipped position.
    pub objective_g: f64,
    pub method: PlacementMethod,
}

impl PlacementResult {
    fn from_offset(inst: &SingleUserInstance, delta: f64, method: PlacementMethod) -> Self {
        let antenna_x = inst.clip(inst.user_x - delta);
        Self {
            antenna_x,
            offset_delta: delta,
            objective_g: objective_g(inst, antenna_x),
            method,
        }
    }
}

/// `g(x) = beta (delta^2 + C) + ln(delta^2 + C) + 2 alpha x`. The average SNR
/// at `x` is `rho * eta * exp(-g(x))`.
pub fn objective_g(inst: &SingleUserInstance, antenna_x: f64) -> f64 {
    let r2 = (inst.user_x - antenna_x).powi(2) + inst.c;
    inst.beta * r2 + r2.ln() + 2.0 * inst.alpha * antenna_x
}

/// `dg/dx = -2 beta delta - 2 delta / (delta^2 + C) + 2 alpha`.
pub fn objective_g_prime(inst: &SingleUserInstance, antenna_x: f64) -> f64 {
    let delta = inst.user_x - antenna_x;
    let r2 = delta * delta + inst.c;
    -2.0 * inst.beta * delta - 2.0 * delta / r2 + 2.0 * inst.alpha
}

/// `d2g/dx2 = 2 beta + 2 / (delta^2 + C) - 4 delta^2 / (delta^2 + C)^2`.
pub fn objective_g_second(inst: &SingleUserInstance, antenna_x: f64) -> f64 {
    let delta = inst.user_x - antenna_x;
    let r2 = delta * delta + inst.c;
    2.0 * inst.beta + 2.0 / r2 - 4.0 * delta * delta / (r2 * r2)
}

/// Sufficient condition `beta d_v^2 >= 1` for strict convexity of `g`.
pub fn convexity_holds(inst: &SingleUserInstance) -> bool {
    inst.beta * inst.height * inst.height >= 1.0
}

/// Closed-form optimum under the convexity condition.
///
/// Substituting `delta = y + alpha/(3 beta)` in the stationarity cubic gives
/// `y^3 + p y + q = 0` with
///
/// ```text
/// p = C + 1/beta - alpha^2/(3 beta^2)
/// q = -2 alpha^3/(27 beta^3) + alpha/(3 beta^2) - 2 alpha C/(3 beta)
/// ```
///
/// whose real root is `cbrt(-q/2 + u) + cbrt(-q/2 - u)`,
/// `u = sqrt((q/2)^2 + (p/3)^3)`.
pub fn optimal_position_cardano(inst: &SingleUserInstance) -> Result<PlacementResult> {
    if !convexity_holds(inst) {
        return Err(Error::Precondition(format!(
            "beta * d_v^2 = {} < 1; closed form requires a convex objective",
            inst.beta * inst.height * inst.height
        )));
    }
    let (a, b, c) = (inst.alpha, inst.beta, inst.c);
    let p = c + 1.0 / b - a * a / (3.0 * b * b);
    let q = -2.0 * a.powi(3) / (27.0 * b.powi(3)) + a / (3.0 * b * b) - 2.0 * a * c / (3.0 * b);
    match cardano_depressed(p, q) {
        Some(y) => Ok(PlacementResult::from_offset(
            inst,
            y + a / (3.0 * b),
            PlacementMethod::Cardano,
        )),
        None => Ok(bisection_on_derivative(inst)),
    }
}

fn bisection_on_derivative(inst: &SingleUserInstance) -> PlacementResult {
    let lo = 0.0;
    let hi = inst.user_x.clamp(0.0, inst.x_max);
    let gp = |x: f64| objective_g_prime(inst, x);
    let x = if gp(lo) >= 0.0 {
        lo
    } else if gp(hi) <= 0.0 {
        hi
    } else {
        bisect_root(gp, lo, hi, 1e-13)
    };
    PlacementResult {
        antenna_x: x,
        offset_delta: inst.user_x - x,
        objective_g: objective_g(inst, x),
        method: PlacementMethod::CardanoBisection,
    }
}

/// Exact optimum for any instance: the closed form when convex, otherwise the
/// best of all real stationary points inside `[0, x_max]` and both ends.
pub fn optimal_position_exact(inst: &SingleUserInstance) -> PlacementResult {
    if let Ok(r) = optimal_position_cardano(inst) {
        return r;
    }
    let (a, b, c) = (inst.alpha, inst.beta, inst.c);
    // beta delta^3 - alpha delta^2 + (beta C + 1) delta - alpha C = 0
    let mut best = PlacementResult {
        antenna_x: 0.0,
        offset_delta: inst.user_x,
        objective_g: objective_g(inst, 0.0),
        method: PlacementMethod::ExactRoots,
    };
    let ends = [inst.x_max];
    let stationary = real_roots(b, -a, b * c + 1.0, -a * c)
        .into_iter()
        .map(|delta| inst.user_x - delta)
        .filter(|x| (0.0..=inst.x_max).contains(x));
    for x in ends.into_iter().chain(stationary) {
        let g = objective_g(inst, x);
        if g < best.objective_g {
            best = PlacementResult {
                antenna_x: x,
                offset_delta: inst.user_x - x,
                objective_g: g,
                method: PlacementMethod::ExactRoots,
            };
        }
    }
    best
}

/// Small-offset approximation `x = x_u - alpha C / (1 + beta C)`.
pub fn approx_position(inst: &SingleUserInstance) -> PlacementResult {
    let delta = inst.alpha * inst.c / (1.0 + inst.beta * inst.c);
    PlacementResult::from_offset(inst, delta, PlacementMethod::Approximate)
}

/// Antenna directly above the user.
pub fn position_ignoring_attenuation(inst: &SingleUserInstance) -> PlacementResult {
    PlacementResult::from_offset(inst, 0.0, PlacementMethod::IgnoreAttenuation)
}

/// Grid search over `[0, x_max]` followed by golden-section refinement in the
/// neighbourhood of the best grid point.
pub fn oracle_position(inst: &SingleUserInstance, grid_step: f64) -> Result<PlacementResult> {
    if !(grid_step > 0.0) || !grid_step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grid_step must be > 0, got {grid_step}"
        )));
    }
    let g = |x: f64| objective_g(inst, x);
    let cells = (inst.x_max / grid_step).ceil() as usize;
    let point = |i: usize| (i as f64 * grid_step).min(inst.x_max);
    let (mut best_i, mut best_g) = (0usize, g(0.0));
    for i in 1..=cells {
        let v = g(point(i));
        if v < best_g {
            best_i = i;
            best_g = v;
        }
    }
    let mut x = point(best_i);
    if cells > 0 {
        let lo = point(best_i.saturating_sub(1));
        let hi = point((best_i + 1).min(cells));
        let (xr, gr) = golden_section_minimize(g, lo, hi, ORACLE_REFINE_TOL);
        if gr < best_g {
            x = xr;
            best_g = gr;
        }
    }
    Ok(PlacementResult {
        antenna_x: x,
        offset_delta: inst.user_x - x,
        objective_g: best_g,
        method: PlacementMethod::Oracle,
    })
}

/// Placement strategies compared for the single-user layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placement {
    /// Exact optimum (closed form when convex).
    Cardano,
    Approximate,
    IgnoreAttenuation,
    /// Antenna fixed at the region centre `D/2`.
    FixedCenter,
}

impl Placement {
    pub const ALL: [Placement; 4] = [
        Placement::Cardano,
        Placement::Approximate,
        Placement::IgnoreAttenuation,
        Placement::FixedCenter,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Placement::Cardano => "cardano",
            Placement::Approximate => "approximate",
            Placement::IgnoreAttenuation => "ignore_attenuation",
            Placement::FixedCenter => "fixed_center",
        }
    }
}

/// How a single-user placement is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateMetric {
    /// `log2(1 + rho E[|h|^2])`.
    #[default]
    MeanSnr,
    /// `E[log2(1 + rho |h|^2)] = P(LoS) log2(1 + rho |h_LoS|^2)`.
    Ergodic,
}

pub fn place(
    params: &SystemParams,
    inst: &SingleUserInstance,
    strategy: Placement,
) -> PlacementResult {
    match strategy {
        Placement::Cardano => optimal_position_exact(inst),
        Placement::Approximate => approx_position(inst),
        Placement::IgnoreAttenuation => position_ignoring_attenuation(inst),
        Placement::FixedCenter => {
            let x = inst.clip(params.region_side / 2.0);
            PlacementResult {
                antenna_x: x,
                offset_delta: inst.user_x - x,
                objective_g: objective_g(inst, x),
                method: PlacementMethod::FixedCenter,
            }
        }
    }
}

/// Rate at a given antenna position, always including in-waveguide
/// attenuation in the evaluation.
pub fn rate_at(
    params: &SystemParams,
    user_x: f64,
    user_y: f64,
    antenna_x: f64,
    metric: RateMetric,
) -> Result<f64> {
    let user = Point3::ground(user_x, user_y);
    let rho = params.snr_scale();
    match metric {
        RateMetric::MeanSnr => {
            let gain = expected_channel_gain(params, user, antenna_x)?;
            Ok((rho * gain).ln_1p() / std::f64::consts::LN_2)
        }
        RateMetric::Ergodic => {
            let h = crate::model::los_channel_single(params, user, antenna_x, true)?;
            let antenna = Point3::new(antenna_x, 0.0, params.waveguide_height);
            let p = crate::model::los_probability(params, antenna, user)?;
            Ok(p * (rho * h.norm_sqr()).ln_1p() / std::f64::consts::LN_2)
        }
    }
}

pub fn user_rate(
    params: &SystemParams,
    user_x: f64,
    user_y: f64,
    strategy: Placement,
    metric: RateMetric,
) -> Result<f64> {
    let inst = SingleUserInstance::from_params(params, user_x, user_y)?;
    let placement = place(params, &inst, strategy);
    rate_at(params, user_x, user_y, placement.antenna_x, metric)
}

/// Uniform user inside the region: `x ~ U(0, D)`, `y ~ U(-D/2, D/2)`.
pub fn draw_user<R: Rng + ?Sized>(rng: &mut R, side: f64) -> (f64, f64) {
    let x = rng.random::<f64>() * side;
    let y = (rng.random::<f64>() - 0.5) * side;
    (x, y)
}

/// Average rate over `num_users` uniformly placed users.
pub fn average_rate_single_user<R: Rng + ?Sized>(
    params: &SystemParams,
    strategy: Placement,
    num_users: usize,
    rng: &mut R,
) -> Result<MeanEstimate> {
    average_rate_single_user_with(params, strategy, RateMetric::MeanSnr, num_users, rng)
}

pub fn average_rate_single_user_with<R: Rng + ?Sized>(
    params: &SystemParams,
    strategy: Placement,
    metric: RateMetric,
    num_users: usize,
    rng: &mut R,
) -> Result<MeanEstimate> {
    params.validate()?;
    if num_users == 0 {
        return Err(Error::InvalidArgument("num_users must be >= 1".into()));
    }
    let rates = (0..num_users)
        .map(|_| {
            let (x, y) = draw_user(rng, params.region_side);
            user_rate(params, x, y, strategy, metric)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanEstimate::from_samples(&rates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;

    fn inst(ux: f64, uy: f64, dv: f64, alpha: f64, beta: f64, x_max: f64) -> SingleUserInstance {
        SingleUserInstance::new(ux, uy, dv, alpha, beta, x_max).unwrap()
    }

    fn stationarity_residual(i: &SingleUserInstance, delta: f64) -> f64 {
        i.beta * delta.powi(3) - i.alpha * delta * delta + (i.beta * i.c + 1.0) * delta
            - i.alpha * i.c
    }

    #[test]
    fn g_at_user_without_attenuation() {
        let i = inst(25.0, 5.0, 10.0, 0.0, 0.1, 50.0);
        assert!((objective_g(&i, 25.0) - (0.1 * 125.0 + 125f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn g_matches_expected_gain() {
        let params = SystemParams {
            blockage_beta: 0.03,
            ..SystemParams::default()
        };
        let i = SingleUserInstance::from_params(&params, 18.0, -7.0).unwrap();
        for x in [0.0, 9.0, 17.5, 40.0] {
            let via_g = params.snr_scale() * params.eta() * (-objective_g(&i, x)).exp();
            let gain = expected_channel_gain(&params, Point3::ground(18.0, -7.0), x).unwrap();
            assert!((via_g - params.snr_scale() * gain).abs() <= 1e-12 * via_g);
        }
    }

    #[test]
    fn convexity_condition() {
        assert!(convexity_holds(&inst(1.0, 0.0, 10.0, 0.0, 0.1, 50.0)));
        assert!(convexity_holds(&inst(1.0, 0.0, 3.17, 0.0, 0.1, 50.0)));
        assert!(!convexity_holds(&inst(1.0, 0.0, 3.16, 0.0, 0.1, 50.0)));
        assert!(!convexity_holds(&inst(1.0, 0.0, 10.0, 0.0, 1e-5, 50.0)));
    }

    #[test]
    fn cardano_without_attenuation_sits_above_user() {
        let r = optimal_position_cardano(&inst(25.0, 5.0, 10.0, 0.0, 0.1, 50.0)).unwrap();
        assert_eq!(r.method, PlacementMethod::Cardano);
        assert!((r.antenna_x - 25.0).abs() < 1e-12);
    }

    #[test]
    fn cardano_matches_oracle_on_reference_case() {
        let i = inst(25.0, 5.0, 10.0, 0.0092, 0.1, 50.0);
        let c = optimal_position_cardano(&i).unwrap();
        let o = oracle_position(&i, ORACLE_GRID_STEP).unwrap();
        assert!((c.antenna_x - o.antenna_x).abs() <= 1e-3, "{c:?} {o:?}");
        assert!(c.objective_g <= o.objective_g + 1e-12);
        assert!(stationarity_residual(&i, c.offset_delta).abs() <= 1e-8 * (1.0 + i.beta * i.c));
        assert!(c.offset_delta > 0.0);
    }

    #[test]
    fn cardano_clips_at_feed_point() {
        let r = optimal_position_cardano(&inst(0.0, 5.0, 10.0, 0.0092, 0.1, 50.0)).unwrap();
        assert_eq!(r.antenna_x, 0.0);
        assert!(r.offset_delta > 0.0);
    }

    #[test]
    fn cardano_rejects_nonconvex() {
        assert!(matches!(
            optimal_position_cardano(&inst(10.0, 0.0, 10.0, 0.0092, 1e-5, 50.0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn exact_handles_nonconvex_instances() {
        let i = inst(40.0, 3.0, 10.0, 0.0092, 1e-5, 50.0);
        let r = optimal_position_exact(&i);
        assert_eq!(r.method, PlacementMethod::ExactRoots);
        let o = oracle_position(&i, 1e-3).unwrap();
        assert!((r.antenna_x - o.antenna_x).abs() < 1e-3);
        assert!(r.objective_g <= o.objective_g + 1e-12);
        // beta == 0: the cubic degenerates to a quadratic
        let i = inst(40.0, 3.0, 10.0, 0.0092, 0.0, 50.0);
        let r = optimal_position_exact(&i);
        let o = oracle_position(&i, 1e-3).unwrap();
        assert!(r.objective_g <= o.objective_g + 1e-12);
    }

    #[test]
    fn approximation_reference_offset() {
        // C = 125: delta = 0.0092 * 125 / 13.5
        let r = approx_position(&inst(25.0, 5.0, 10.0, 0.0092, 0.1, 50.0));
        assert!((r.offset_delta - 0.085_185_185).abs() < 1e-8);
        let r = approx_position(&inst(25.0, 5.0, 10.0, 0.0, 0.1, 50.0));
        assert_eq!(r.antenna_x, 25.0);
    }

    #[test]
    fn approximation_tracks_exact_for_small_alpha() {
        for alpha in [1e-4, 1e-3] {
            let i = inst(30.0, 8.0, 10.0, alpha, 0.1, 50.0);
            let ratio = approx_position(&i).offset_delta
                / optimal_position_cardano(&i).unwrap().offset_delta;
            assert!(
                (ratio - 1.0).abs() < 10.0 * alpha,
                "alpha {alpha}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn approximation_close_to_exact_for_default_parameters() {
        let params = SystemParams::default();
        let mut rng = rng_from_seed(77);
        for _ in 0..1000 {
            let (x, y) = draw_user(&mut rng, params.region_side);
            let i = SingleUserInstance::from_params(&params, x, y).unwrap();
            let a = approx_position(&i).antenna_x;
            let c = optimal_position_cardano(&i).unwrap().antenna_x;
            assert!((a - c).abs() <= 1e-2, "user ({x}, {y}): {a} vs {c}");
        }
    }

    #[test]
    fn ignore_attenuation_clips() {
        assert_eq!(
            position_ignoring_attenuation(&inst(25.0, 0.0, 10.0, 0.1, 0.1, 50.0)).antenna_x,
            25.0
        );
        assert_eq!(
            position_ignoring_attenuation(&inst(-1.0, 0.0, 10.0, 0.1, 0.1, 50.0)).antenna_x,
            0.0
        );
    }

    #[test]
    fn oracle_basics() {
        let i = inst(12.34, 1.0, 10.0, 0.0, 0.1, 50.0);
        assert!((oracle_position(&i, 1e-3).unwrap().antenna_x - 12.34).abs() < 1e-5);
        assert!(oracle_position(&i, 0.0).is_err());
        let i = inst(12.34, 1.0, 10.0, 0.02, 0.05, 50.0);
        let coarse = oracle_position(&i, 0.1).unwrap();
        let fine = oracle_position(&i, 0.05).unwrap();
        assert!(fine.objective_g <= coarse.objective_g + 1e-15);
        let zero = inst(3.0, 1.0, 10.0, 0.02, 0.05, 0.0);
        assert_eq!(oracle_position(&zero, 1e-3).unwrap().antenna_x, 0.0);
    }

    #[test]
    fn rates_collapse_under_heavy_blockage() {
        let params = SystemParams {
            blockage_beta: 10.0,
            ..SystemParams::default()
        };
        for s in Placement::ALL {
            let r = average_rate_single_user(&params, s, 200, &mut rng_from_seed(1)).unwrap();
            assert!(r.mean.abs() < 1e-300, "{s:?}: {r:?}");
        }
    }

    #[test]
    fn strategy_ordering_in_sparse_blockage() {
        let params = SystemParams {
            blockage_beta: 1e-5,
            region_side: 50.0,
            ..SystemParams::default()
        };
        let rate = |s| average_rate_single_user(&params, s, 2000, &mut rng_from_seed(4)).unwrap();
        let (c, a, n) = (
            rate(Placement::Cardano),
            rate(Placement::Approximate),
            rate(Placement::IgnoreAttenuation),
        );
        // common users: the exact optimum dominates pointwise
        assert!(c.mean >= a.mean - 1e-12);
        assert!(a.mean >= n.mean - 1e-12);
        assert_eq!(
            average_rate_single_user(&params, Placement::Cardano, 50, &mut rng_from_seed(9))
                .unwrap(),
            average_rate_single_user(&params, Placement::Cardano, 50, &mut rng_from_seed(9))
                .unwrap()
        );
    }

    #[test]
    fn ergodic_metric_is_not_larger_than_mean_snr_metric() {
        // Jensen: E[log(1 + X)] <= log(1 + E[X])
        let params = SystemParams {
            blockage_beta: 0.01,
            ..SystemParams::default()
        };
        for x in [0.0, 10.0, 30.0] {
            let m = rate_at(&params, 20.0, 4.0, x, RateMetric::MeanSnr).unwrap();
            let e = rate_at(&params, 20.0, 4.0, x, RateMetric::Ergodic).unwrap();
            assert!(e <= m + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn cardano_is_global_minimum(
            ux in 0.0f64..60.0, uy in -30.0f64..30.0, dv in 3.2f64..15.0,
            alpha in 0.0f64..0.05, beta in 0.05f64..1.0,
        ) {
            prop_assume!(beta * dv * dv >= 1.0);
            let i = inst(ux, uy, dv, alpha, beta, 60.0);
            let r = optimal_position_cardano(&i).unwrap();
            for k in 0..=600 {
                let x = k as f64 * 0.1;
                prop_assert!(r.objective_g <= objective_g(&i, x) + 1e-9);
            }
            let interior = i.user_x - r.offset_delta;
            if interior > 0.0 && interior < i.x_max {
                prop_assert!(stationarity_residual(&i, r.offset_delta).abs() <= 1e-8 * (1.0 + beta * i.c));
            }
            let naive = position_ignoring_attenuation(&i);
            prop_assert!(naive.objective_g >= r.objective_g - 1e-12);
        }

        #[test]
        fn second_derivative_positive_when_convex(
            ux in 0.0f64..100.0, uy in -50.0f64..50.0, dv in 3.2f64..15.0,
            beta in 0.05f64..1.0, x in 0.0f64..100.0,
        ) {
            prop_assume!(beta * dv * dv >= 1.0);
            let i = inst(ux, uy, dv, 0.01, beta, 100.0);
            prop_assert!(objective_g_second(&i, x) > 0.0);
        }
    }
}
