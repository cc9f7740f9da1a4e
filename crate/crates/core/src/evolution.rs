//! Time integration of `θ_t + ∇·(uθ) + Λ^{2α}θ = 0`.
//!
//! The linear part is integrated exactly in Fourier space; the nonlinearity
//! `N = −∇·(uθ)` enters through exponential time differencing (ETD1, or the
//! two-stage ETD2RK scheme). The same exact propagator drives the successive
//! approximations of the Duhamel formula in [`picard_iterate`].

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::spectral::{
    fractional_symbol, gradient_lp_norm, lp_norm, nonlinear_term, Dealias, GridSpec, SpectralField,
};
use crate::{Result, SqgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Etd1,
    #[default]
    Etd2,
}

fn default_nonlinear() -> bool {
    true
}

/// Physical and numerical parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub alpha: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub record_times: Vec<f64>,
    #[serde(default)]
    pub dealias: Dealias,
    /// `false` drops the transport term and evolves the linear equation only.
    #[serde(default = "default_nonlinear")]
    pub nonlinear: bool,
}

impl SimConfig {
    pub fn new(alpha: f64, dt: f64, t_end: f64, record_times: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            alpha,
            dt,
            t_end,
            integrator: Integrator::Etd2,
            record_times,
            dealias: Dealias::TwoThirds,
            nonlinear: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_alpha(self.alpha)?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SqgError::config("sim.dt", "dt must be positive and finite"));
        }
        if !(self.t_end.is_finite() && self.dt < self.t_end) {
            return Err(SqgError::config(
                "sim.t_end",
                "t_end must be finite and exceed dt",
            ));
        }
        if self.record_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SqgError::config(
                "sim.record_times",
                "record_times must be strictly increasing",
            ));
        }
        if self
            .record_times
            .iter()
            .any(|&t| !(0.0..=self.t_end).contains(&t))
        {
            return Err(SqgError::config(
                "sim.record_times",
                "record_times must lie in [0, t_end]",
            ));
        }
        Ok(())
    }

    /// Critical Lebesgue exponent `m = 2/(2α−1)`.
    pub fn m(&self) -> f64 {
        critical_exponent(self.alpha)
    }

    /// Default step `1e−3·(L/2π)^{2α}`, reduced proportionally above 128 points.
    pub fn suggested_dt(grid: &GridSpec, alpha: f64) -> f64 {
        let base = 1e-3 * (grid.box_length() / (2.0 * std::f64::consts::PI)).powf(2.0 * alpha);
        base * (128.0 / grid.n() as f64).min(1.0)
    }
}

pub fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.5 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(SqgError::config("alpha", "alpha must lie in (0.5, 1]"))
    }
}

/// `m = 2/(2α−1)`, the scale-invariant Lebesgue exponent.
pub fn critical_exponent(alpha: f64) -> f64 {
    2.0 / (2.0 * alpha - 1.0)
}

/// `φ₁(z) = (e^z − 1)/z` with `φ₁(0) = 1`.
pub fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// `φ₂(z) = (e^z − 1 − z)/z²` with `φ₂(0) = 1/2`.
pub fn phi2(z: f64) -> f64 {
    if z.abs() < 0.5 {
        // Σ z^k/(k+2)!
        let mut term = 0.5;
        let mut sum = 0.5;
        for k in 1..25 {
            term *= z / (k as f64 + 2.0);
            sum += term;
        }
        sum
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// `θ̂ ↦ e^{−|ξ|^{2α}dt} θ̂`.
pub fn linear_propagate(theta: &SpectralField, alpha: f64, dt: f64) -> Result<SpectralField> {
    if !(dt >= 0.0) {
        return Err(SqgError::invalid(format!(
            "propagation time must be >= 0, got {dt}"
        )));
    }
    let sym = fractional_symbol(2.0 * alpha, theta.grid())?;
    let mut out = theta.clone();
    Zip::from(out.coeffs_mut())
        .and(&sym)
        .for_each(|c, &l| *c *= (-l * dt).exp());
    Ok(out)
}

/// Cached multipliers for a fixed step length.
struct EtdCoefficients {
    h: f64,
    decay: Array2<f64>,
    phi1: Array2<f64>,
    phi2: Array2<f64>,
}

impl EtdCoefficients {
    fn new(symbol: &Array2<f64>, h: f64) -> Self {
        Self {
            h,
            decay: symbol.mapv(|l| (-l * h).exp()),
            phi1: symbol.mapv(|l| phi1(-l * h)),
            phi2: symbol.mapv(|l| phi2(-l * h)),
        }
    }
}

struct Stepper {
    symbol: Array2<f64>,
    integrator: Integrator,
    dealias: Dealias,
    nonlinear: bool,
    main: EtdCoefficients,
}

impl Stepper {
    fn new(grid: &GridSpec, config: &SimConfig) -> Result<Self> {
        let symbol = fractional_symbol(2.0 * config.alpha, grid)?;
        let main = EtdCoefficients::new(&symbol, config.dt);
        Ok(Self {
            symbol,
            integrator: config.integrator,
            dealias: config.dealias,
            nonlinear: config.nonlinear,
            main,
        })
    }

    /// `N = −∇·(uθ)`, or zero for linear runs.
    fn forcing(&self, theta: &SpectralField) -> SpectralField {
        if self.nonlinear {
            nonlinear_term(theta, self.dealias).scaled(-1.0)
        } else {
            SpectralField::zeros(*theta.grid())
        }
    }

    fn advance(&self, theta: &SpectralField, h: f64, time: f64) -> Result<SpectralField> {
        let short;
        let co = if h == self.main.h {
            &self.main
        } else {
            short = EtdCoefficients::new(&self.symbol, h);
            &short
        };
        let n0 = self.forcing(theta);
        let mut a = theta.clone();
        Zip::from(a.coeffs_mut())
            .and(n0.coeffs())
            .and(&co.decay)
            .and(&co.phi1)
            .for_each(|c, &n, &e, &p| *c = e * *c + h * p * n);
        if self.integrator == Integrator::Etd2 && self.nonlinear {
            let n1 = self.forcing(&a);
            Zip::from(a.coeffs_mut())
                .and(n1.coeffs())
                .and(n0.coeffs())
                .and(&co.phi2)
                .for_each(|c, &n1, &n0, &p| *c += h * p * (n1 - n0));
        }
        if !a.is_finite() {
            return Err(SqgError::Instability { time: time + h });
        }
        Ok(a)
    }

    /// `‖Λ^α θ‖²` by Parseval.
    fn dissipation_rate(&self, theta: &SpectralField) -> f64 {
        let l = theta.grid().box_length();
        let s = Zip::from(theta.coeffs())
            .and(&self.symbol)
            .fold(0.0, |acc, c, &w| acc + w * c.norm_sqr());
        l * l * s
    }
}

/// One step of length `config.dt` from time 0.
pub fn step(theta: &SpectralField, config: &SimConfig) -> Result<SpectralField> {
    config.validate()?;
    Stepper::new(theta.grid(), config)?.advance(theta, config.dt, 0.0)
}

/// Norm exponents monitored at every sample.
pub const MONITORED_P: [f64; 3] = [2.0, 4.0, f64::INFINITY];

/// Per-step energy bookkeeping.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyMonitor {
    pub times: Vec<f64>,
    /// `‖θ‖²_{L²}` after each step (index 0 is the initial state).
    pub energy: Vec<f64>,
    /// `2∫₀ᵗ ‖Λ^αθ‖² dτ`, trapezoid rule on the step grid.
    pub dissipated: Vec<f64>,
}

impl EnergyMonitor {
    /// `max_t |E(t) + D(t) − E(0)| / E(0)`.
    pub fn balance_residual(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        if e0 == 0.0 {
            return 0.0;
        }
        self.energy
            .iter()
            .zip(&self.dissipated)
            .map(|(e, d)| (e + d - e0).abs() / e0)
            .fold(0.0, f64::max)
    }

    /// Largest relative step-to-step increase of the energy (0 when monotone).
    pub fn max_energy_increase(&self) -> f64 {
        relative_increase(&self.energy)
    }
}

fn relative_increase(series: &[f64]) -> f64 {
    series
        .windows(2)
        .map(|w| {
            if w[0] > 0.0 {
                (w[1] - w[0]) / w[0]
            } else {
                w[1]
            }
        })
        .fold(0.0, f64::max)
}

/// Sampled solution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SimConfig,
    pub samples: Vec<(f64, SpectralField)>,
    /// `‖θ‖_{L^p}` at each sample for `p` in [`MONITORED_P`].
    pub norms: Vec<[f64; 3]>,
    pub monitor: EnergyMonitor,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    /// Largest relative increase of `‖θ‖_{L^p}` between consecutive samples,
    /// for each monitored `p`.
    pub fn max_principle_violation(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            let s: Vec<f64> = self.norms.iter().map(|n| n[i]).collect();
            *o = relative_increase(&s);
        }
        out
    }

    pub fn final_field(&self) -> Option<&SpectralField> {
        self.samples.last().map(|s| &s.1)
    }
}

fn monitored_norms(theta: &SpectralField) -> Result<[f64; 3]> {
    Ok([
        lp_norm(theta, MONITORED_P[0])?,
        lp_norm(theta, MONITORED_P[1])?,
        lp_norm(theta, MONITORED_P[2])?,
    ])
}

/// Advance from `t = 0` to `t_end`, shortening steps to land on record times.
pub fn simulate(theta0: &SpectralField, config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    let stepper = Stepper::new(theta0.grid(), config)?;
    let mut theta = theta0.clone();
    let mut t = 0.0;
    let mut samples = Vec::with_capacity(config.record_times.len());
    let mut norms = Vec::with_capacity(config.record_times.len());
    let mut monitor = EnergyMonitor::default();
    let mut rate = stepper.dissipation_rate(&theta);
    monitor.times.push(0.0);
    monitor.energy.push(theta.energy());
    monitor.dissipated.push(0.0);

    let mut pending = config.record_times.iter().copied().peekable();
    while let Some(&tr) = pending.peek() {
        if tr <= t + 1e-12 * config.dt {
            samples.push((tr, theta.clone()));
            norms.push(monitored_norms(&theta)?);
            pending.next();
            continue;
        }
        let h = if t + config.dt * (1.0 + 1e-9) >= tr {
            tr - t
        } else {
            config.dt
        };
        theta = stepper.advance(&theta, h, t)?;
        t = if h == tr - t { tr } else { t + h };
        let new_rate = stepper.dissipation_rate(&theta);
        let d = monitor.dissipated.last().copied().unwrap_or(0.0) + h * (rate + new_rate);
        rate = new_rate;
        monitor.times.push(t);
        monitor.energy.push(theta.energy());
        monitor.dissipated.push(d);
    }
    Ok(Trajectory {
        config: config.clone(),
        samples,
        norms,
        monitor,
    })
}

/// Time-weighted sup norms of one successive approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KatoIterateRecord {
    pub n: usize,
    pub k_n: f64,
    pub kp_n: f64,
    pub q: f64,
    /// `sup_t ‖θ_n(t) − θ_{n−1}(t)‖_{L²}`; absent for the first iterate.
    pub increment: Option<f64>,
}

/// `θ₁(t) = K_α(t)*θ₀`, `θ_{n+1}(t) = K_α(t)*θ₀ − ∫₀ᵗ K_α(t−s)*∇·(u_nθ_n)(s) ds`.
///
/// Iterates live on the uniform grid `t_j = j·dt` up to `t_end`. Between nodes
/// the forcing of the previous iterate is interpolated linearly and integrated
/// against the exact propagator. `K_n`, `K'_n` are sups over `t ≥ 10·dt`.
pub fn picard_iterate(
    theta0: &SpectralField,
    config: &SimConfig,
    n_iters: usize,
    q: f64,
) -> Result<Vec<(Trajectory, KatoIterateRecord)>> {
    config.validate()?;
    if n_iters == 0 {
        return Err(SqgError::invalid("n_iters must be >= 1"));
    }
    let m = config.m();
    if !(q >= m) {
        return Err(SqgError::invalid(format!("q = {q} must be >= m = {m}")));
    }
    let steps = (config.t_end / config.dt).round() as usize;
    let h = config.dt;
    let times: Vec<f64> = (0..=steps).map(|j| j as f64 * h).collect();
    let linear: Vec<SpectralField> = times
        .iter()
        .map(|&t| linear_propagate(theta0, config.alpha, t))
        .collect::<Result<_>>()?;

    let grid = *theta0.grid();
    let symbol = fractional_symbol(2.0 * config.alpha, &grid)?;
    let co = EtdCoefficients::new(&symbol, h);
    let w_kato = (1.0 / config.alpha) * (1.0 / m - 1.0 / q);
    let w_grad = 1.0 / (2.0 * config.alpha) + w_kato;
    let t_min = 10.0 * h;

    let mut out: Vec<(Trajectory, KatoIterateRecord)> = Vec::with_capacity(n_iters);
    let mut current = linear.clone();
    let mut growth_streak = 0;
    for n in 1..=n_iters {
        if n > 1 {
            let prev = &out.last().expect("previous iterate").0.samples;
            let forcing: Vec<SpectralField> = prev
                .iter()
                .map(|(_, f)| nonlinear_term(f, config.dealias).scaled(-1.0))
                .collect();
            let mut duhamel = SpectralField::zeros(grid);
            current = Vec::with_capacity(times.len());
            current.push(linear[0].clone());
            for j in 0..steps {
                Zip::from(duhamel.coeffs_mut())
                    .and(forcing[j].coeffs())
                    .and(forcing[j + 1].coeffs())
                    .and(&co.decay)
                    .and(&co.phi1)
                    .and(&co.phi2)
                    .for_each(|d, &a, &b, &e, &p1, &p2| {
                        *d = e * *d + h * (p1 * a + p2 * (b - a));
                    });
                let next = linear[j + 1].add(&duhamel);
                if !next.is_finite() {
                    return Err(SqgError::Divergence { iterate: n });
                }
                current.push(next);
            }
        }

        let mut k_n = 0.0_f64;
        let mut kp_n = 0.0_f64;
        for (t, f) in times.iter().zip(&current) {
            if *t < t_min - 1e-12 * h {
                continue;
            }
            k_n = k_n.max(t.powf(w_kato) * lp_norm(f, q)?);
            kp_n = kp_n.max(t.powf(w_grad) * gradient_lp_norm(f, q)?);
        }
        let increment = out.last().map(|(prev, _)| {
            prev.samples
                .iter()
                .zip(&current)
                .map(|((_, a), b)| b.sub(a).energy().sqrt())
                .fold(0.0, f64::max)
        });
        if !k_n.is_finite() || !kp_n.is_finite() {
            return Err(SqgError::Divergence { iterate: n });
        }
        if let Some((_, prev)) = out.last() {
            let shrinking = match (prev.increment, increment) {
                (Some(a), Some(b)) => b < a,
                _ => true,
            };
            if k_n > prev.k_n && !shrinking {
                growth_streak += 1;
            } else {
                growth_streak = 0;
            }
            if growth_streak >= 3 {
                return Err(SqgError::Divergence { iterate: n });
            }
        }

        let energy: Vec<f64> = current.iter().map(|f| f.energy()).collect();
        let norms = current.iter().map(monitored_norms).collect::<Result<_>>()?;
        let traj = Trajectory {
            config: config.clone(),
            samples: times.iter().copied().zip(current.iter().cloned()).collect(),
            norms,
            monitor: EnergyMonitor {
                times: times.clone(),
                dissipated: vec![f64::NAN; energy.len()],
                energy,
            },
        };
        out.push((
            traj,
            KatoIterateRecord {
                n,
                k_n,
                kp_n,
                q,
                increment,
            },
        ));
    }
    Ok(out)
}

/// Smallest `c` with `K_{n+1} ≤ K_1 + c·K_n·K'_n` across the measured iterates.
pub fn empirical_kato_constant(records: &[KatoIterateRecord]) -> Option<f64> {
    let k1 = records.first()?.k_n;
    records
        .windows(2)
        .filter(|w| w[0].k_n * w[0].kp_n > 0.0)
        .map(|w| ((w[1].k_n - k1) / (w[0].k_n * w[0].kp_n)).max(0.0))
        .reduce(f64::max)
}

/// Run `K_{j+1} = K1 + c·K_j²` for `n` steps; `true` when every iterate stays
/// at or below `1/(2c)`.
pub fn kato_recursion_check(k1: f64, c: f64, n: usize) -> Result<bool> {
    if !(c > 0.0) || n == 0 {
        return Err(SqgError::invalid("kato recursion needs c > 0 and n >= 1"));
    }
    let bound = 1.0 / (2.0 * c);
    let mut k = k1;
    for _ in 0..n {
        if !(k <= bound) {
            return Ok(false);
        }
        k = k1 + c * k * k;
    }
    Ok(k <= bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::forward_transform;
    use std::f64::consts::PI;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n, 2.0 * PI).unwrap()
    }

    fn cos_mode(g: &GridSpec, k1: usize, k2: usize) -> SpectralField {
        let n = g.n();
        let v = Array2::from_shape_fn((n, n), |(r, c)| {
            (k1 as f64 * g.coordinate(c) + k2 as f64 * g.coordinate(r)).cos()
        });
        forward_transform(&v, g).unwrap()
    }

    fn blob(g: &GridSpec) -> SpectralField {
        let n = g.n();
        let c0 = g.box_length() / 2.0;
        let v = Array2::from_shape_fn((n, n), |(r, c)| {
            let x = g.coordinate(c) - c0;
            let y = g.coordinate(r) - c0;
            (-(x * x / 0.5 + y * y / 0.3)).exp() + 0.5 * (-((x - 0.7).powi(2) + y * y) / 0.2).exp()
        });
        forward_transform(&v, g).unwrap()
    }

    #[test]
    fn phi_functions() {
        assert_eq!(phi1(0.0), 1.0);
        assert_eq!(phi2(0.0), 0.5);
        for z in [-40.0, -3.0, -0.6, -0.4, -1e-3, 1e-3, 0.3] {
            let p1 = (f64::exp(z) - 1.0) / z;
            assert!((phi1(z) - p1).abs() < 1e-12 * p1.abs().max(1e-3));
            if z.abs() > 0.1 {
                let p2 = (f64::exp(z) - 1.0 - z) / (z * z);
                assert!((phi2(z) - p2).abs() < 1e-12, "z={z}");
            }
        }
        // continuity across the series switch
        assert!((phi2(0.4999999) - phi2(0.5000001)).abs() < 1e-7);
    }

    #[test]
    fn linear_single_mode() {
        let g = grid(16);
        let f = cos_mode(&g, 1, 0);
        for alpha in [0.6, 0.75, 1.0] {
            let p = linear_propagate(&f, alpha, 1.0).unwrap();
            assert!((p.mode(1, 0).re - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        }
        assert_eq!(linear_propagate(&f, 0.8, 0.0).unwrap(), f);
        assert!(linear_propagate(&f, 0.8, -1.0).is_err());
        // α = 1 is the heat multiplier
        let f = cos_mode(&g, 2, 1);
        let p = linear_propagate(&f, 1.0, 0.3).unwrap();
        assert!((p.mode(2, 1).re - 0.5 * (-5.0f64 * 0.3).exp()).abs() < 1e-15);
    }

    #[test]
    fn semigroup() {
        let g = grid(32);
        let f = blob(&g);
        let a = linear_propagate(&linear_propagate(&f, 0.7, 0.13).unwrap(), 0.7, 0.29).unwrap();
        let b = linear_propagate(&f, 0.7, 0.42).unwrap();
        let err = a.sub(&b).energy().sqrt() / f.energy().sqrt();
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn step_without_forcing_matches_propagator() {
        let g = grid(16);
        let f = cos_mode(&g, 1, 0);
        for integrator in [Integrator::Etd1, Integrator::Etd2] {
            let mut cfg = SimConfig::new(0.75, 0.01, 1.0, vec![]).unwrap();
            cfg.integrator = integrator;
            let s = step(&f, &cfg).unwrap();
            let l = linear_propagate(&f, 0.75, 0.01).unwrap();
            assert!(s.sub(&l).energy().sqrt() < 1e-15);
        }
    }

    #[test]
    fn etd1_local_error_is_second_order() {
        let g = grid(32);
        let f = blob(&g).scaled(5.0);
        let defect = |dt: f64| {
            let mut cfg = SimConfig::new(0.75, dt, 1.0, vec![]).unwrap();
            cfg.integrator = Integrator::Etd1;
            let one = step(&f, &cfg).unwrap();
            cfg.dt = dt / 2.0;
            let two = step(&step(&f, &cfg).unwrap(), &cfg).unwrap();
            one.sub(&two).energy().sqrt()
        };
        let r = defect(0.02) / defect(0.01);
        assert!((3.5..=4.5).contains(&r), "ratio {r}");
    }

    #[test]
    fn energy_law_at_small_step() {
        let g = grid(32);
        let f = blob(&g);
        let dt = 1e-4;
        let cfg = SimConfig::new(0.75, dt, 1.0, vec![]).unwrap();
        let s = step(&f, &cfg).unwrap();
        let lhs = (s.energy() - f.energy()) / dt;
        let rhs = -2.0 * f.fractional_derivative(0.75).unwrap().energy();
        assert!((lhs - rhs).abs() < 1e-3 * rhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = grid(16);
        let cfg = SimConfig::new(0.75, 0.01, 0.1, vec![0.0, 0.05, 0.1]).unwrap();
        let tr = simulate(&SpectralField::zeros(g), &cfg).unwrap();
        assert_eq!(tr.samples.len(), 3);
        assert!(tr.samples.iter().all(|(_, f)| f.energy() == 0.0));
    }

    #[test]
    fn single_mode_closed_form() {
        let g = grid(16);
        let cfg = SimConfig::new(0.75, 1e-3, 1.0, vec![0.5, 1.0]).unwrap();
        let tr = simulate(&cos_mode(&g, 1, 0), &cfg).unwrap();
        let (t, f) = &tr.samples[1];
        assert_eq!(*t, 1.0);
        assert!((f.mode(1, 0).re - 0.5 * (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn record_times_are_hit_exactly() {
        let g = grid(16);
        let cfg = SimConfig::new(1.0, 0.03, 0.5, vec![0.0, 0.1, 0.101, 0.5]).unwrap();
        let tr = simulate(&blob(&g), &cfg).unwrap();
        assert_eq!(tr.times(), vec![0.0, 0.1, 0.101, 0.5]);
        let f = tr.final_field().unwrap();
        assert!(f.hermitian_defect() < 1e-14);
    }

    #[test]
    fn nonlinear_run_dissipates() {
        let g = grid(32);
        let rec: Vec<f64> = (0..=20).map(|i| 0.05 * i as f64).collect();
        let cfg = SimConfig::new(1.0, 2e-3, 1.0, rec).unwrap();
        let tr = simulate(&blob(&g).scaled(3.0), &cfg).unwrap();
        let l2: Vec<f64> = tr.norms.iter().map(|n| n[0]).collect();
        assert!(l2.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(tr.monitor.max_energy_increase(), 0.0);
        assert!(tr.monitor.balance_residual() < 1e-3);
        let v = tr.max_principle_violation();
        assert!(v.iter().all(|&x| x <= 1e-6), "{v:?}");
    }

    #[test]
    fn invalid_configs() {
        assert!(SimConfig::new(0.4, 0.01, 1.0, vec![]).is_err());
        assert!(SimConfig::new(0.75, 0.0, 1.0, vec![]).is_err());
        assert!(SimConfig::new(0.75, 2.0, 1.0, vec![]).is_err());
        assert!(SimConfig::new(0.75, 0.1, 1.0, vec![0.5, 0.2]).is_err());
        assert!(SimConfig::new(0.75, 0.1, 1.0, vec![1.5]).is_err());
    }

    #[test]
    fn first_picard_iterate_is_linear_flow() {
        let g = grid(16);
        let f = blob(&g).scaled(1e-2);
        let cfg = SimConfig::new(0.8, 0.05, 0.5, vec![]).unwrap();
        let its = picard_iterate(&f, &cfg, 1, cfg.m()).unwrap();
        assert_eq!(its.len(), 1);
        assert!(its[0].1.increment.is_none());
        for (t, s) in &its[0].0.samples {
            assert_eq!(*s, linear_propagate(&f, 0.8, *t).unwrap());
        }
        assert!(picard_iterate(&f, &cfg, 0, 5.0).is_err());
        assert!(picard_iterate(&f, &cfg, 1, 2.0).is_err());
    }

    #[test]
    fn picard_increments_shrink_on_small_data() {
        let g = grid(32);
        let f = blob(&g).scaled(0.05);
        let cfg = SimConfig::new(0.8, 0.02, 0.6, vec![]).unwrap();
        let its = picard_iterate(&f, &cfg, 4, cfg.m()).unwrap();
        let inc: Vec<f64> = its.iter().filter_map(|i| i.1.increment).collect();
        assert_eq!(inc.len(), 3);
        assert!(inc[1] < 0.2 * inc[0] && inc[2] < 0.2 * inc[1], "{inc:?}");
        let c = empirical_kato_constant(&its.iter().map(|i| i.1).collect::<Vec<_>>()).unwrap();
        let (k1, kp1, k2) = (its[0].1.k_n, its[0].1.kp_n, its[1].1.k_n);
        assert!(k2 <= k1 + c * k1 * kp1 * (1.0 + 1e-12));
    }

    #[test]
    fn kato_recursion() {
        assert!(kato_recursion_check(1.0 / 8.0, 1.0, 100).unwrap());
        assert!(kato_recursion_check(0.0, 1.0, 10).unwrap());
        assert!(!kato_recursion_check(1.0, 1.0, 20).unwrap());
        assert!(kato_recursion_check(0.2499999, 1.0, 1000).unwrap());
        assert!(kato_recursion_check(0.1, 0.0, 10).is_err());
    }
}
