//! Physical-layer model: geometry, line-of-sight channel coefficients,
//! blockage probabilities and blockage sampling.
//!
//! A pinching antenna sits on a dielectric waveguide at height `d_v`. The
//! signal travels `x` metres inside the guide (guided wavelength
//! `lambda / n_eff`, amplitude decay `exp(-alpha x)`) before radiating to a
//! user on the ground plane. The line-of-sight path exists with probability
//! `exp(-beta * distance^2)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{ensure_finite, Error, Result};
use crate::units::dbm_to_watts;

/// Speed of light in vacuum (m/s).
///
/// The exact SI value is used rather than `3e8`; path-gain constants
/// therefore differ in the fourth significant digit from tables built on the
/// rounded value.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Physical constants and model coefficients shared by every routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Carrier frequency (Hz).
    pub carrier_freq_hz: f64,
    /// Speed of light (m/s).
    pub light_speed: f64,
    /// In-waveguide amplitude attenuation (1/m, natural-log units).
    pub atten_alpha: f64,
    /// Blockage density coefficient (1/m^2).
    pub blockage_beta: f64,
    /// Waveguide height above the user plane (m).
    pub waveguide_height: f64,
    /// Side length of the square service region (m).
    pub region_side: f64,
    /// Effective refractive index of the waveguide.
    pub refractive_index: f64,
    /// Receiver noise power (W).
    pub noise_power: f64,
    /// Transmit power budget (W).
    pub tx_power: f64,
}

impl Default for SystemParams {
    /// 28 GHz, `n_eff = 1.4`, `d_v = 10 m`, `D = 50 m`, 0.0092 1/m attenuation,
    /// `beta = 0.1`, noise -110 dBm, transmit power 40 dBm.
    fn default() -> Self {
        Self {
            carrier_freq_hz: 28e9,
            light_speed: SPEED_OF_LIGHT,
            atten_alpha: 0.0092,
            blockage_beta: 0.1,
            waveguide_height: 10.0,
            region_side: 50.0,
            refractive_index: 1.4,
            noise_power: dbm_to_watts(-110.0),
            tx_power: dbm_to_watts(40.0),
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("light_speed", self.light_speed),
            ("atten_alpha", self.atten_alpha),
            ("blockage_beta", self.blockage_beta),
            ("waveguide_height", self.waveguide_height),
            ("region_side", self.region_side),
            ("refractive_index", self.refractive_index),
            ("noise_power", self.noise_power),
            ("tx_power", self.tx_power),
        ] {
            ensure_finite(name, v)?;
        }
        let checks = [
            (self.carrier_freq_hz > 0.0, "carrier_freq_hz must be > 0"),
            (self.light_speed > 0.0, "light_speed must be > 0"),
            (self.atten_alpha >= 0.0, "atten_alpha must be >= 0"),
            (self.blockage_beta >= 0.0, "blockage_beta must be >= 0"),
            (self.waveguide_height > 0.0, "waveguide_height must be > 0"),
            (self.region_side > 0.0, "region_side must be > 0"),
            (
                self.refractive_index >= 1.0,
                "refractive_index must be >= 1",
            ),
            (self.noise_power > 0.0, "noise_power must be > 0"),
            (self.tx_power >= 0.0, "tx_power must be >= 0"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidArgument(msg.to_string()));
            }
        }
        Ok(())
    }

    /// Free-space wavelength `c / f_c`.
    pub fn wavelength(&self) -> f64 {
        self.light_speed / self.carrier_freq_hz
    }

    /// Guided wavelength `lambda / n_eff`.
    pub fn guided_wavelength(&self) -> f64 {
        self.wavelength() / self.refractive_index
    }

    /// Path-gain constant `c^2 / (16 pi^2 f_c^2)` (m^2).
    pub fn eta(&self) -> f64 {
        self.light_speed.powi(2) / (16.0 * PI * PI * self.carrier_freq_hz.powi(2))
    }

    /// Transmit SNR scale `rho = P / sigma^2`.
    pub fn snr_scale(&self) -> f64 {
        self.tx_power / self.noise_power
    }

    /// Default antenna travel range: the full region side.
    pub fn default_x_max(&self) -> f64 {
        self.region_side
    }
}

/// A point in the 3-D scene (m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// A user on the ground plane.
    pub const fn ground(x: f64, y: f64) -> Self {
        Self { x, y, z: 0.0 }
    }

    pub fn distance_sq(&self, other: &Point3) -> f64 {
        (self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    fn ensure_finite(&self, name: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "{name} has non-finite coordinates: {self:?}"
            )))
        }
    }
}

/// Multi-user layout: `N` waveguides spread uniformly across the region,
/// one pinching antenna per waveguide, `M <= N` ground users.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiGeometry {
    pub antenna_x: Vec<f64>,
    pub users: Vec<Point3>,
    pub x_max: f64,
    waveguide_y: Vec<f64>,
    height: f64,
}

impl MultiGeometry {
    /// Waveguide `n` (zero-based) lies at `y = n * D/(N-1) - D/2`. A single
    /// waveguide is placed on the centre line `y = 0`.
    pub fn new(
        params: &SystemParams,
        antenna_x: Vec<f64>,
        users: Vec<Point3>,
        x_max: f64,
    ) -> Result<Self> {
        params.validate()?;
        let n = antenna_x.len();
        let m = users.len();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "at least one waveguide is required".into(),
            ));
        }
        if m == 0 {
            return Err(Error::InvalidArgument(
                "at least one user is required".into(),
            ));
        }
        if m > n {
            return Err(Error::InvalidArgument(format!(
                "number of users ({m}) exceeds number of waveguides ({n})"
            )));
        }
        ensure_finite("x_max", x_max)?;
        if x_max < 0.0 {
            return Err(Error::InvalidArgument("x_max must be >= 0".into()));
        }
        for (i, &x) in antenna_x.iter().enumerate() {
            ensure_finite("antenna_x", x)?;
            if !(0.0..=x_max).contains(&x) {
                return Err(Error::InvalidArgument(format!(
                    "antenna_x[{i}] = {x} outside [0, {x_max}]"
                )));
            }
        }
        for u in &users {
            u.ensure_finite("user")?;
            if u.z != 0.0 {
                return Err(Error::InvalidArgument(
                    "users must lie on the ground plane".into(),
                ));
            }
        }
        let d = params.region_side;
        let waveguide_y = if n == 1 {
            vec![0.0]
        } else {
            let spacing = d / (n - 1) as f64;
            (0..n).map(|i| i as f64 * spacing - d / 2.0).collect()
        };
        Ok(Self {
            antenna_x,
            users,
            x_max,
            waveguide_y,
            height: params.waveguide_height,
        })
    }

    /// All antennas parked at `x_max / 2`.
    pub fn centered(
        params: &SystemParams,
        num_waveguides: usize,
        users: Vec<Point3>,
        x_max: f64,
    ) -> Result<Self> {
        Self::new(params, vec![x_max / 2.0; num_waveguides], users, x_max)
    }

    pub fn num_waveguides(&self) -> usize {
        self.antenna_x.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn waveguide_y(&self) -> &[f64] {
        &self.waveguide_y
    }

    /// Waveguide spacing `D/(N-1)`; `None` for a single waveguide.
    pub fn spacing(&self) -> Option<f64> {
        match self.waveguide_y.len() {
            0 | 1 => None,
            _ => Some(self.waveguide_y[1] - self.waveguide_y[0]),
        }
    }

    pub fn antenna_position(&self, n: usize) -> Point3 {
        Point3::new(self.antenna_x[n], self.waveguide_y[n], self.height)
    }

    /// `C_{m,n} = (y_m - y_n)^2 + d_v^2`.
    pub fn lateral_term(&self, m: usize, n: usize) -> f64 {
        (self.users[m].y - self.waveguide_y[n]).powi(2) + self.height * self.height
    }

    /// Replaces the antenna positions after range checks.
    pub fn set_antenna_x(&mut self, antenna_x: &[f64]) -> Result<()> {
        if antenna_x.len() != self.antenna_x.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} antenna positions, got {}",
                self.antenna_x.len(),
                antenna_x.len()
            )));
        }
        for &x in antenna_x {
            ensure_finite("antenna_x", x)?;
            if !(0.0..=self.x_max).contains(&x) {
                return Err(Error::InvalidArgument(format!(
                    "antenna_x {x} outside [0, {}]",
                    self.x_max
                )));
            }
        }
        self.antenna_x.copy_from_slice(antenna_x);
        Ok(())
    }

    fn check_indices(&self, m: usize, n: usize) -> Result<()> {
        if m >= self.num_users() {
            return Err(Error::IndexOutOfRange {
                what: "user",
                index: m,
                len: self.num_users(),
            });
        }
        if n >= self.num_waveguides() {
            return Err(Error::IndexOutOfRange {
                what: "waveguide",
                index: n,
                len: self.num_waveguides(),
            });
        }
        Ok(())
    }
}

/// One draw of the 0/1 line-of-sight indicators, `M x N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockageRealization {
    pub gamma: DMatrix<u8>,
}

impl BlockageRealization {
    pub fn all_clear(m: usize, n: usize) -> Self {
        Self {
            gamma: DMatrix::from_element(m, n, 1),
        }
    }

    pub fn all_blocked(m: usize, n: usize) -> Self {
        Self {
            gamma: DMatrix::zeros(m, n),
        }
    }

    pub fn is_clear(&self, m: usize, n: usize) -> bool {
        self.gamma[(m, n)] != 0
    }
}

/// Effective complex channel, `M x N`, row `m` is `h_m^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub h: DMatrix<Complex64>,
}

impl ChannelMatrix {
    /// Applies a blockage mask entrywise.
    pub fn masked(&self, blockage: &BlockageRealization) -> ChannelMatrix {
        let h = self.h.zip_map(&blockage.gamma, |h, g| {
            if g == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                h
            }
        });
        ChannelMatrix { h }
    }
}

/// `sqrt(eta) exp(-j(2 pi d / lambda + 2 pi x / lambda_g)) / (d exp(alpha x))`
/// without any validation; `distance` is the free-space distance.
#[inline]
pub(crate) fn los_coefficient(
    params: &SystemParams,
    distance: f64,
    guided_length: f64,
    with_attenuation: bool,
) -> Complex64 {
    let k0 = 2.0 * PI / params.wavelength();
    let kg = 2.0 * PI / params.guided_wavelength();
    let phase = k0 * distance + kg * guided_length;
    let mut amplitude = params.eta().sqrt() / distance;
    if with_attenuation {
        amplitude *= (-params.atten_alpha * guided_length).exp();
    }
    Complex64::from_polar(amplitude, -phase)
}

/// Single-user line-of-sight coefficient with the antenna at
/// `(antenna_x, 0, d_v)` and the feed point at `(0, 0, d_v)`.
pub fn los_channel_single(
    params: &SystemParams,
    user: Point3,
    antenna_x: f64,
    with_attenuation: bool,
) -> Result<Complex64> {
    params.validate()?;
    user.ensure_finite("user")?;
    ensure_finite("antenna_x", antenna_x)?;
    if user.z != 0.0 {
        return Err(Error::InvalidArgument(
            "user must lie on the ground plane".into(),
        ));
    }
    if antenna_x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "antenna_x must be >= 0, got {antenna_x}"
        )));
    }
    let antenna = Point3::new(antenna_x, 0.0, params.waveguide_height);
    let d = user.distance(&antenna);
    Ok(los_coefficient(params, d, antenna_x, with_attenuation))
}

/// Probability `exp(-beta |antenna - user|^2)` that the link is unobstructed.
pub fn los_probability(params: &SystemParams, antenna: Point3, user: Point3) -> Result<f64> {
    antenna.ensure_finite("antenna")?;
    user.ensure_finite("user")?;
    ensure_finite("blockage_beta", params.blockage_beta)?;
    if params.blockage_beta < 0.0 {
        return Err(Error::InvalidArgument("blockage_beta must be >= 0".into()));
    }
    Ok((-params.blockage_beta * antenna.distance_sq(&user)).exp())
}

/// Mean of `|gamma h|^2` over the blockage indicator for the single-user
/// layout: `eta exp(-beta r^2) / (r^2 exp(2 alpha x))`, `r^2 = (x - x_u)^2 + C`.
pub fn expected_channel_gain(params: &SystemParams, user: Point3, antenna_x: f64) -> Result<f64> {
    params.validate()?;
    user.ensure_finite("user")?;
    ensure_finite("antenna_x", antenna_x)?;
    let c = user.y * user.y + params.waveguide_height.powi(2);
    let r2 = (antenna_x - user.x).powi(2) + c;
    Ok(params.eta() * (-params.blockage_beta * r2).exp()
        / (r2 * (2.0 * params.atten_alpha * antenna_x).exp()))
}

#[inline]
pub(crate) fn multiuser_coefficient(
    params: &SystemParams,
    user: &Point3,
    wg_y: f64,
    x: f64,
) -> Complex64 {
    let c = (user.y - wg_y).powi(2) + params.waveguide_height.powi(2);
    let d = ((x - user.x).powi(2) + c).sqrt();
    los_coefficient(params, d, x, false)
}

/// Line-of-sight coefficient between user `m` and the antenna on waveguide
/// `n`. In-waveguide attenuation is not applied in the multi-user model.
pub fn multiuser_los_channel(
    params: &SystemParams,
    geom: &MultiGeometry,
    m: usize,
    n: usize,
) -> Result<Complex64> {
    geom.check_indices(m, n)?;
    Ok(multiuser_coefficient(
        params,
        &geom.users[m],
        geom.waveguide_y[n],
        geom.antenna_x[n],
    ))
}

/// All `M x N` unblocked coefficients at the current antenna positions.
pub fn los_matrix(params: &SystemParams, geom: &MultiGeometry) -> ChannelMatrix {
    let (m, n) = (geom.num_users(), geom.num_waveguides());
    let h = DMatrix::from_fn(m, n, |i, j| {
        multiuser_coefficient(
            params,
            &geom.users[i],
            geom.waveguide_y[j],
            geom.antenna_x[j],
        )
    });
    ChannelMatrix { h }
}

/// `P(gamma_{m,n} = 1)` for every user-antenna pair.
pub fn los_probability_matrix(params: &SystemParams, geom: &MultiGeometry) -> DMatrix<f64> {
    DMatrix::from_fn(geom.num_users(), geom.num_waveguides(), |m, n| {
        let r2 = (geom.antenna_x[n] - geom.users[m].x).powi(2) + geom.lateral_term(m, n);
        (-params.blockage_beta * r2).exp()
    })
}

/// Draws every indicator independently, users outer, waveguides inner.
pub fn sample_blockage<R: Rng + ?Sized>(
    rng: &mut R,
    params: &SystemParams,
    geom: &MultiGeometry,
) -> BlockageRealization {
    let probs = los_probability_matrix(params, geom);
    sample_with_probabilities(rng, &probs)
}

pub(crate) fn sample_with_probabilities<R: Rng + ?Sized>(
    rng: &mut R,
    probs: &DMatrix<f64>,
) -> BlockageRealization {
    let (m, n) = probs.shape();
    let mut gamma = DMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let u: f64 = rng.random();
            gamma[(i, j)] = u8::from(u < probs[(i, j)]);
        }
    }
    BlockageRealization { gamma }
}
