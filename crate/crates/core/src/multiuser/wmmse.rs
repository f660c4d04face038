//! Weighted-MMSE beamforming on a fixed set of channel samples.
//!
//! With the receiver estimate `conj(u) y`, one sweep is
//!
//! ```text
//! T = sum_i |h^T v_i|^2 + sigma^2,  u = h^T v_m / T,  e = 1 - |h^T v_m|^2 / T,  w = 1/e
//! A = (1/L) sum_l sum_k w |u|^2 conj(h_k) h_k^T
//! b_m = (1/L) sum_l w_m u_m conj(h_m)
//! v_m = (A + mu I)^-1 b_m
//! ```
//!
//! with `mu >= 0` set by bisection so the power budget is met.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{check_dims, empirical_sum_rate_channels, BeamformerSet};
use crate::error::{Error, Result};

/// Eigenvalues of `A` below this fraction of the largest are treated as zero.
const EIG_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WmmseConfig {
    /// Stop once the relative sum-rate improvement falls below this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for WmmseConfig {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iters: 20,
        }
    }
}

/// Receivers, MSEs and weights, all `M x L`.
#[derive(Debug, Clone, PartialEq)]
pub struct WmmseState {
    pub u: DMatrix<Complex64>,
    pub e: DMatrix<f64>,
    pub w: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WmmseOutcome {
    pub beamformers: BeamformerSet,
    /// Receiver state at the last iterate.
    pub state: WmmseState,
    /// Empirical sum rate at the initial point and after every sweep.
    pub trajectory: Vec<f64>,
    /// Lagrange multiplier of the last beamformer update.
    pub multiplier: f64,
}

impl WmmseOutcome {
    pub fn iterations(&self) -> usize {
        self.trajectory.len() - 1
    }

    /// Rate of the returned beamformers, the best along the trajectory.
    pub fn final_rate(&self) -> f64 {
        self.trajectory
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Closed-form receiver, MSE and weight updates for fixed beamformers.
pub fn receiver_update(
    channels: &[DMatrix<Complex64>],
    v: &BeamformerSet,
    noise_power: f64,
) -> WmmseState {
    let m = v.num_users();
    let l = channels.len();
    let mut state = WmmseState {
        u: DMatrix::zeros(m, l),
        e: DMatrix::zeros(m, l),
        w: DMatrix::zeros(m, l),
    };
    for (s, h) in channels.iter().enumerate() {
        let z = h * &v.v;
        for k in 0..m {
            let received: f64 = (0..m).map(|i| z[(k, i)].norm_sqr()).sum();
            let signal = z[(k, k)].norm_sqr();
            let t = received + noise_power;
            // e = (interference + noise) / T avoids cancellation at high SINR
            let e = ((received - signal).max(0.0) + noise_power) / t;
            state.u[(k, s)] = z[(k, k)] / t;
            state.e[(k, s)] = e;
            state.w[(k, s)] = 1.0 / e;
        }
    }
    state
}

/// Solution of `min_V sum_m v_m^H A v_m - 2 Re(v_m^H b_m)` subject to
/// `sum_m ||v_m||^2 <= P_max`. Returns the beamformers and the multiplier.
pub fn beamformer_update(
    channels: &[DMatrix<Complex64>],
    state: &WmmseState,
    p_max: f64,
) -> Result<(BeamformerSet, f64)> {
    let first = channels
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty sample set".into()))?;
    let (m, n) = first.shape();
    let l = channels.len() as f64;
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    let mut b = DMatrix::<Complex64>::zeros(n, m);
    for (s, h) in channels.iter().enumerate() {
        for k in 0..m {
            let w = state.w[(k, s)];
            let u = state.u[(k, s)];
            let hk = h.row(k);
            let hc: DVector<Complex64> = hk.transpose().map(|z| z.conj());
            a += (&hc * hk) * Complex64::new(w * u.norm_sqr() / l, 0.0);
            let mut col = b.column_mut(k);
            col += hc * (u * (w / l));
        }
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("WMMSE covariance".into()));
    }
    // Hermitian by construction; symmetrise rounding before the eigensolver
    let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = a.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let keep: Vec<bool> = eig
        .eigenvalues
        .iter()
        .map(|&x| lambda_max > 0.0 && x > EIG_TOL * lambda_max)
        .collect();
    let coeff = eig.eigenvectors.adjoint() * &b;
    // row energies ||(Q^H B)_k||^2
    let energy: Vec<f64> = (0..n)
        .map(|k| coeff.row(k).iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let power = |mu: f64| -> f64 {
        (0..n)
            .filter(|&k| keep[k])
            .map(|k| energy[k] / (eig.eigenvalues[k] + mu).powi(2))
            .sum()
    };
    let mu = if power(0.0) <= p_max {
        0.0
    } else {
        let total: f64 = energy.iter().sum();
        // power(mu) <= total / mu^2
        let mut hi = (total / p_max).sqrt();
        while power(hi) > p_max {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if power(mid) > p_max {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let scale = DVector::from_iterator(
        n,
        (0..n).map(|k| {
            Complex64::new(
                if keep[k] {
                    1.0 / (eig.eigenvalues[k] + mu)
                } else {
                    0.0
                },
                0.0,
            )
        }),
    );
    let mut scaled = coeff;
    for k in 0..n {
        let mut row = scaled.row_mut(k);
        row *= scale[k];
    }
    let v = &eig.eigenvectors * scaled;
    Ok((BeamformerSet::new(v)?, mu))
}

/// Alternates receiver/weight and beamformer updates from `v_init` on fixed
/// channels. The best iterate is returned; the trajectory records every
/// sweep.
pub fn wmmse_beamformers(
    v_init: &BeamformerSet,
    channels: &[DMatrix<Complex64>],
    noise_power: f64,
    p_max: f64,
    config: &WmmseConfig,
) -> Result<WmmseOutcome> {
    let first = channels
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty sample set".into()))?;
    check_dims(first, v_init)?;
    if !v_init.is_feasible(p_max) {
        return Err(Error::Precondition(format!(
            "initial beamformers use {} W above the budget {p_max} W",
            v_init.total_power()
        )));
    }
    let mut current = v_init.clone();
    let mut rate = empirical_sum_rate_channels(channels, &current, noise_power)?;
    let mut trajectory = vec![rate];
    let mut best = (current.clone(), rate);
    let mut state = receiver_update(channels, &current, noise_power);
    let mut multiplier = 0.0;
    for _ in 0..config.max_iters {
        let (next, mu) = beamformer_update(channels, &state, p_max)?;
        let next_rate = empirical_sum_rate_channels(channels, &next, noise_power)?;
        trajectory.push(next_rate);
        multiplier = mu;
        let improvement = next_rate - rate;
        current = next;
        rate = next_rate;
        state = receiver_update(channels, &current, noise_power);
        if rate > best.1 {
            best = (current.clone(), rate);
        }
        if improvement.abs() <= config.tol * rate.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(WmmseOutcome {
        beamformers: best.0,
        state,
        trajectory,
        multiplier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{los_matrix, MultiGeometry, Point3, SystemParams};
    use crate::multiuser::zf::{matched_filter_beamformers, zf_beamformers};
    use crate::multiuser::{sample_channels, SampleSet};
    use crate::seed::rng_from_seed;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn geometry(params: &SystemParams, seed: u64, m: usize, n: usize) -> MultiGeometry {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        let d = params.region_side;
        let users = (0..m)
            .map(|_| Point3::ground(rng.random::<f64>() * d, (rng.random::<f64>() - 0.5) * d))
            .collect();
        let xs = (0..n).map(|_| rng.random::<f64>() * d).collect();
        MultiGeometry::new(params, xs, users, d).unwrap()
    }

    #[test]
    fn siso_reaches_full_power_mrt_in_one_sweep() {
        let h = DMatrix::from_element(1, 1, c(3e-5, -4e-5));
        let noise = 1e-14;
        let p: f64 = 10.0;
        // any full-power start, arbitrary phase
        let v0 = BeamformerSet::new(DMatrix::from_element(
            1,
            1,
            Complex64::from_polar(p.sqrt(), 0.7),
        ))
        .unwrap();
        let out = wmmse_beamformers(
            &v0,
            std::slice::from_ref(&h),
            noise,
            p,
            &WmmseConfig {
                tol: 0.0,
                max_iters: 1,
            },
        )
        .unwrap();
        let want = (1.0 + p * h[(0, 0)].norm_sqr() / noise).log2();
        assert!((out.final_rate() - want).abs() < 1e-12 * want);
        assert!((out.beamformers.total_power() - p).abs() < 1e-9 * p);
        assert!(out.multiplier > 0.0);
    }

    #[test]
    fn siso_power_grows_from_low_power_start() {
        // the unconstrained step scales |v| by 1 + 1/SINR
        let h = DMatrix::from_element(1, 1, c(3e-5, -4e-5));
        let noise = 1e-14;
        let v0 = BeamformerSet::new(DMatrix::from_element(1, 1, c(0.1, 0.0))).unwrap();
        let out = wmmse_beamformers(
            &v0,
            std::slice::from_ref(&h),
            noise,
            10.0,
            &WmmseConfig {
                tol: 0.0,
                max_iters: 1,
            },
        )
        .unwrap();
        let sinr = 0.01 * h[(0, 0)].norm_sqr() / noise;
        let growth = out.beamformers.total_power() / 0.01;
        assert!((growth - (1.0 + 1.0 / sinr).powi(2)).abs() < 1e-9);
        assert!(out.trajectory[1] > out.trajectory[0]);
    }

    #[test]
    fn receiver_update_invariants() {
        let params = SystemParams {
            blockage_beta: 0.01,
            ..SystemParams::default()
        };
        let geom = geometry(&params, 3, 3, 4);
        let samples = SampleSet::draw(&mut rng_from_seed(4), &params, &geom, 10).unwrap();
        let ch = sample_channels(&params, &geom, &samples).unwrap();
        let v = matched_filter_beamformers(&ch, params.tx_power).unwrap();
        let st = receiver_update(&ch, &v, params.noise_power);
        for (e, w) in st.e.iter().zip(st.w.iter()) {
            assert!(*e > 0.0 && *e <= 1.0);
            assert!((w * e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sum_rate_is_monotone_and_power_is_tight() {
        let params = SystemParams {
            blockage_beta: 0.01,
            ..SystemParams::default()
        };
        for seed in 0..5 {
            let geom = geometry(&params, 100 + seed, 4, 4);
            let samples = SampleSet::draw(&mut rng_from_seed(seed), &params, &geom, 20).unwrap();
            let ch = sample_channels(&params, &geom, &samples).unwrap();
            let v0 = zf_beamformers(&ch, params.tx_power).unwrap().beamformers;
            let out = wmmse_beamformers(
                &v0,
                &ch,
                params.noise_power,
                params.tx_power,
                &WmmseConfig {
                    tol: 0.0,
                    max_iters: 30,
                },
            )
            .unwrap();
            for pair in out.trajectory.windows(2) {
                assert!(
                    pair[1] >= pair[0] * (1.0 - 1e-9),
                    "seed {seed}: {:?}",
                    out.trajectory
                );
            }
            assert!(out.beamformers.is_feasible(params.tx_power));
            if out.multiplier > 0.0 {
                assert!(
                    (out.beamformers.total_power() - params.tx_power).abs()
                        <= 1e-6 * params.tx_power
                );
            }
        }
    }

    #[test]
    fn improves_on_zero_forcing() {
        let params = SystemParams::default();
        let geom = geometry(&params, 11, 4, 4);
        let h = los_matrix(&params, &geom).h;
        let ch = vec![h];
        let zf = zf_beamformers(&ch, params.tx_power).unwrap().beamformers;
        let zf_rate = empirical_sum_rate_channels(&ch, &zf, params.noise_power).unwrap();
        let out = wmmse_beamformers(
            &zf,
            &ch,
            params.noise_power,
            params.tx_power,
            &WmmseConfig::default(),
        )
        .unwrap();
        assert!(out.final_rate() >= zf_rate);
        assert_eq!(out.trajectory[0], zf_rate);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let h = DMatrix::from_element(1, 1, c(1.0, 0.0));
        let v0 = BeamformerSet::new(DMatrix::from_element(1, 1, c(2.0, 0.0))).unwrap();
        assert!(matches!(
            wmmse_beamformers(&v0, &[h], 1.0, 1.0, &WmmseConfig::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn unconstrained_optimum_inside_budget_uses_zero_multiplier() {
        // tiny noise relative to a strong channel: A is large and b small
        let h = DMatrix::from_element(1, 1, c(1.0, 0.0));
        let state = WmmseState {
            u: DMatrix::from_element(1, 1, c(0.5, 0.0)),
            e: DMatrix::from_element(1, 1, 0.5),
            w: DMatrix::from_element(1, 1, 2.0),
        };
        let (v, mu) = beamformer_update(&[h], &state, 100.0).unwrap();
        assert_eq!(mu, 0.0);
        // A = 2 * 0.25 = 0.5, b = 2 * 0.5 = 1, v = 2
        assert!((v.v[(0, 0)] - c(2.0, 0.0)).norm() < 1e-12);
    }
}
