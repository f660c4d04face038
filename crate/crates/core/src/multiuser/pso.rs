//! Particle-swarm search over one antenna position with everything else
//! held fixed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::{sum_rate_from_products, BeamformerSet, SampleSet};
use crate::error::{Error, Result};
use crate::model::{los_matrix, multiuser_coefficient, MultiGeometry, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub max_iters: usize,
    pub c1: f64,
    pub c2: f64,
    pub inertia_start: f64,
    pub inertia_slope: f64,
    pub velocity_init_fraction: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 30,
            max_iters: 50,
            c1: 2.0,
            c2: 2.0,
            inertia_start: 0.9,
            inertia_slope: 0.5,
            velocity_init_fraction: 0.2,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::InvalidArgument("swarm size must be >= 2".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument("PSO iterations must be >= 1".into()));
        }
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("inertia_start", self.inertia_start),
            ("inertia_slope", self.inertia_slope),
            ("velocity_init_fraction", self.velocity_init_fraction),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `w(k) = inertia_start - inertia_slope * k / K`.
    pub fn inertia(&self, k: usize) -> f64 {
        self.inertia_start - self.inertia_slope * k as f64 / self.max_iters as f64
    }
}

/// Empirical sum rate as a function of one antenna's position, with the
/// contribution of every other antenna cached per sample.
pub struct AntennaFitness<'a> {
    params: &'a SystemParams,
    geom: &'a MultiGeometry,
    antenna: usize,
    /// `H^(l) V` without antenna `n`'s term.
    rest: Vec<DMatrix<Complex64>>,
    /// `gamma^(l)_{m,n}` as 0/1 factors.
    mask: Vec<Vec<f64>>,
    /// Row `n` of `V`.
    v_row: Vec<Complex64>,
}

impl<'a> AntennaFitness<'a> {
    pub fn new(
        antenna: usize,
        v: &BeamformerSet,
        samples: &SampleSet,
        geom: &'a MultiGeometry,
        params: &'a SystemParams,
    ) -> Result<Self> {
        let (m, n) = (geom.num_users(), geom.num_waveguides());
        if antenna >= n {
            return Err(Error::IndexOutOfRange {
                what: "waveguide",
                index: antenna,
                len: n,
            });
        }
        if v.num_users() != m || v.num_waveguides() != n {
            return Err(Error::DimensionMismatch(
                "beamformers do not match the geometry".into(),
            ));
        }
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empty sample set".into()));
        }
        let los = los_matrix(params, geom);
        let v_row: Vec<Complex64> = (0..m).map(|i| v.v[(antenna, i)]).collect();
        let mut rest = Vec::with_capacity(samples.len());
        let mut mask = Vec::with_capacity(samples.len());
        for r in &samples.realizations {
            if r.gamma.shape() != (m, n) {
                return Err(Error::DimensionMismatch(
                    "blockage realization does not match the geometry".into(),
                ));
            }
            let mut h = los.masked(r).h;
            h.column_mut(antenna).fill(Complex64::new(0.0, 0.0));
            rest.push(h * &v.v);
            mask.push((0..m).map(|k| f64::from(r.gamma[(k, antenna)])).collect());
        }
        Ok(Self {
            params,
            geom,
            antenna,
            rest,
            mask,
            v_row,
        })
    }

    /// Empirical sum rate with antenna `n` at `x`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let m = self.geom.num_users();
        let wg_y = self.geom.waveguide_y()[self.antenna];
        let g: Vec<Complex64> = self
            .geom
            .users
            .iter()
            .map(|u| multiuser_coefficient(self.params, u, wg_y, x))
            .collect();
        let mut z = DMatrix::<Complex64>::zeros(m, m);
        let mut acc = 0.0;
        for (rest, mask) in self.rest.iter().zip(&self.mask) {
            z.copy_from(rest);
            for k in 0..m {
                if mask[k] != 0.0 {
                    for i in 0..m {
                        z[(k, i)] += g[k] * self.v_row[i];
                    }
                }
            }
            acc += sum_rate_from_products(&z, self.params.noise_power);
        }
        acc / self.rest.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    pub position: f64,
    pub fitness: f64,
    pub incumbent_fitness: f64,
    /// Best fitness over the initial swarm (incumbent included).
    pub initial_best_fitness: f64,
    /// Global-best fitness after each iteration.
    pub history: Vec<f64>,
}

/// Swarm search for antenna `n` on `[0, x_max]`. Particle 0 starts at the
/// incumbent position, so the returned fitness never falls below it.
pub fn pso_optimize_antenna<R: Rng + ?Sized>(
    antenna: usize,
    v: &BeamformerSet,
    samples: &SampleSet,
    geom: &MultiGeometry,
    params: &SystemParams,
    config: &PsoConfig,
    rng: &mut R,
) -> Result<PsoOutcome> {
    config.validate()?;
    let fitness = AntennaFitness::new(antenna, v, samples, geom, params)?;
    let incumbent = geom.antenna_x[antenna];
    let incumbent_fitness = fitness.evaluate(incumbent);
    let x_max = geom.x_max;
    if x_max == 0.0 {
        return Ok(PsoOutcome {
            position: incumbent,
            fitness: incumbent_fitness,
            incumbent_fitness,
            initial_best_fitness: incumbent_fitness,
            history: Vec::new(),
        });
    }
    let s = config.swarm_size;
    let mut pos = Vec::with_capacity(s);
    pos.push(incumbent);
    for _ in 1..s {
        pos.push(rng.random::<f64>() * x_max);
    }
    let vmax = config.velocity_init_fraction * x_max;
    let mut vel: Vec<f64> = (0..s)
        .map(|_| (2.0 * rng.random::<f64>() - 1.0) * vmax)
        .collect();
    let mut fit: Vec<f64> = std::iter::once(incumbent_fitness)
        .chain(pos[1..].iter().map(|&x| fitness.evaluate(x)))
        .collect();
    let mut pbest = pos.clone();
    let mut pbest_fit = fit.clone();
    let (mut gbest, mut gbest_fit) = (pos[0], fit[0]);
    for i in 1..s {
        if fit[i] > gbest_fit {
            gbest = pos[i];
            gbest_fit = fit[i];
        }
    }
    let initial_best_fitness = gbest_fit;
    let mut history = Vec::with_capacity(config.max_iters);
    for k in 0..config.max_iters {
        let w = config.inertia(k);
        for i in 0..s {
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            vel[i] = w * vel[i]
                + config.c1 * r1 * (pbest[i] - pos[i])
                + config.c2 * r2 * (gbest - pos[i]);
            pos[i] = (pos[i] + vel[i]).clamp(0.0, x_max);
            fit[i] = fitness.evaluate(pos[i]);
            if fit[i] > pbest_fit[i] {
                pbest[i] = pos[i];
                pbest_fit[i] = fit[i];
            }
        }
        for i in 0..s {
            if pbest_fit[i] > gbest_fit {
                gbest = pbest[i];
                gbest_fit = pbest_fit[i];
            }
        }
        history.push(gbest_fit);
    }
    Ok(PsoOutcome {
        position: gbest,
        fitness: gbest_fit,
        incumbent_fitness,
        initial_best_fitness,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BlockageRealization, Point3};
    use crate::multiuser::{empirical_sum_rate, sample_channels, zf::zf_beamformers};
    use crate::seed::rng_from_seed;

    fn setup(params: &SystemParams) -> (MultiGeometry, SampleSet, BeamformerSet) {
        let users = vec![
            Point3::ground(8.0, -12.0),
            Point3::ground(31.0, 4.0),
            Point3::ground(44.0, 19.0),
        ];
        let geom = MultiGeometry::new(params, vec![25.0, 10.0, 40.0, 5.0], users, 50.0).unwrap();
        let samples = SampleSet::draw(&mut rng_from_seed(21), params, &geom, 15).unwrap();
        let ch = sample_channels(params, &geom, &samples).unwrap();
        let v = zf_beamformers(&ch, params.tx_power).unwrap().beamformers;
        (geom, samples, v)
    }

    #[test]
    fn cached_fitness_matches_full_evaluation() {
        let params = SystemParams {
            blockage_beta: 0.01,
            ..SystemParams::default()
        };
        let (geom, samples, v) = setup(&params);
        for n in 0..4 {
            let f = AntennaFitness::new(n, &v, &samples, &geom, &params).unwrap();
            for x in [0.0, 7.3, 25.0, 49.99] {
                let mut moved = geom.clone();
                moved.antenna_x[n] = x;
                let want = empirical_sum_rate(&v, &samples, &moved, &params).unwrap();
                assert!((f.evaluate(x) - want).abs() <= 1e-12 * want.max(1.0));
            }
        }
    }

    #[test]
    fn never_worse_than_incumbent_or_initial_swarm() {
        let params = SystemParams {
            blockage_beta: 0.01,
            ..SystemParams::default()
        };
        let (geom, samples, v) = setup(&params);
        let cfg = PsoConfig {
            swarm_size: 10,
            max_iters: 15,
            ..PsoConfig::default()
        };
        for n in 0..4 {
            let out = pso_optimize_antenna(
                n,
                &v,
                &samples,
                &geom,
                &params,
                &cfg,
                &mut rng_from_seed(n as u64),
            )
            .unwrap();
            assert!(out.fitness >= out.incumbent_fitness);
            assert!(out.fitness >= out.initial_best_fitness);
            assert!((0.0..=50.0).contains(&out.position));
            assert!(out.history.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let params = SystemParams {
            blockage_beta: 0.01,
            ..SystemParams::default()
        };
        let (geom, samples, v) = setup(&params);
        let cfg = PsoConfig {
            swarm_size: 8,
            max_iters: 10,
            ..PsoConfig::default()
        };
        let a = pso_optimize_antenna(1, &v, &samples, &geom, &params, &cfg, &mut rng_from_seed(3))
            .unwrap();
        let b = pso_optimize_antenna(1, &v, &samples, &geom, &params, &cfg, &mut rng_from_seed(3))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_link_matches_fine_grid() {
        let params = SystemParams {
            blockage_beta: 0.0,
            ..SystemParams::default()
        };
        let geom =
            MultiGeometry::new(&params, vec![5.0], vec![Point3::ground(33.3, 6.0)], 50.0).unwrap();
        let samples = SampleSet::repeated(BlockageRealization::all_clear(1, 1), 1, vec![5.0]);
        let v = BeamformerSet::new(DMatrix::from_element(
            1,
            1,
            Complex64::new(params.tx_power.sqrt(), 0.0),
        ))
        .unwrap();
        let f = AntennaFitness::new(0, &v, &samples, &geom, &params).unwrap();
        let step = params.wavelength() / 8.0;
        let (mut best_x, mut best_f) = (0.0, f64::NEG_INFINITY);
        let mut x = 0.0;
        while x <= 50.0 {
            let fx = f.evaluate(x);
            if fx > best_f {
                best_x = x;
                best_f = fx;
            }
            x += step;
        }
        let out = pso_optimize_antenna(
            0,
            &v,
            &samples,
            &geom,
            &params,
            &PsoConfig::default(),
            &mut rng_from_seed(12),
        )
        .unwrap();
        assert!(
            (out.position - best_x).abs() <= 0.05,
            "{} vs {best_x}",
            out.position
        );
    }

    #[test]
    fn inertia_schedule_and_validation() {
        let cfg = PsoConfig::default();
        assert_eq!(cfg.inertia(0), 0.9);
        assert!((cfg.inertia(cfg.max_iters) - 0.4).abs() < 1e-15);
        assert!(PsoConfig {
            swarm_size: 1,
            ..cfg
        }
        .validate()
        .is_err());
        assert!(PsoConfig {
            max_iters: 0,
            ..cfg
        }
        .validate()
        .is_err());
    }

    #[test]
    fn zero_range_consumes_no_randomness() {
        use rand::Rng;
        let params = SystemParams::default();
        let geom =
            MultiGeometry::new(&params, vec![0.0], vec![Point3::ground(3.0, 1.0)], 0.0).unwrap();
        let samples = SampleSet::repeated(BlockageRealization::all_clear(1, 1), 2, vec![0.0]);
        let v = BeamformerSet::new(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0))).unwrap();
        let mut rng = rng_from_seed(6);
        let out = pso_optimize_antenna(
            0,
            &v,
            &samples,
            &geom,
            &params,
            &PsoConfig::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(out.position, 0.0);
        assert_eq!(rng.random::<u64>(), rng_from_seed(6).random::<u64>());
    }
}
