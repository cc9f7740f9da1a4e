//! Initial data generators and the λ-dilation family `λθ₀(λx)`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::fit::{loglog_fit, LogLogFit};
use crate::evolution::SimConfig;
use crate::evolution::{linear_propagate, simulate};
use crate::spectral::{forward_transform, lp_norm, GridSpec, SpectralField};
use crate::{Result, SqgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `A·exp(−ρ²/(2ℓ²))` with `ρ² = x₁² + (a·x₂)²` about the box center.
    Gaussian,
    /// Random phases and amplitudes on the annulus `|ξ| ∈ [κ/2, 3κ/2]`, `κ = 2π/ℓ`,
    /// rescaled so the grid maximum is `A`.
    RingSpectrumRandom,
    /// `A·cos(k x₁)` with `k` the lattice wavenumber closest to `2π/ℓ`.
    SingleMode,
    /// `A·(1 + ρ²/ℓ²)^{−2}`, same `ρ` as [`ProfileKind::Gaussian`].
    AlgebraicBump,
}

/// Rescale the generated field so that `‖θ₀‖_{L^p} = value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetNorm {
    pub p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    pub length_scale: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub target_norm: Option<TargetNorm>,
    /// Ratio `a ≥ 1` of the `x₁` to `x₂` length scales. Radial data (`a = 1`)
    /// is a steady state of the transport term.
    #[serde(default = "one")]
    pub aspect: f64,
}

fn one() -> f64 {
    1.0
}

impl ProfileSpec {
    pub fn new(kind: ProfileKind, amplitude: f64, length_scale: f64) -> Self {
        Self {
            kind,
            amplitude,
            length_scale,
            seed: 0,
            target_norm: None,
            aspect: 1.0,
        }
    }

    pub fn with_aspect(mut self, aspect: f64) -> Self {
        self.aspect = aspect;
        self
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(SqgError::config("profile.amplitude", "must be finite"));
        }
        if !(self.aspect >= 1.0 && self.aspect.is_finite()) {
            return Err(SqgError::config(
                "profile.aspect",
                format!("must be >= 1, got {}", self.aspect),
            ));
        }
        let limit = grid.box_length() / 8.0;
        if !(self.length_scale > 0.0 && self.length_scale <= limit) {
            return Err(SqgError::config(
                "profile.length_scale",
                format!("must lie in (0, L/8 = {limit}], got {}", self.length_scale),
            ));
        }
        if let Some(t) = self.target_norm {
            if !(t.p >= 1.0) || !(t.value > 0.0 && t.value.is_finite()) {
                return Err(SqgError::config(
                    "profile.target_norm",
                    "needs p >= 1 and a positive finite value",
                ));
            }
        }
        Ok(())
    }
}

/// `f(x₁² + (a·x₂)²)` about the box center.
fn elliptic_field(grid: &GridSpec, aspect: f64, f: impl Fn(f64) -> f64) -> Array2<f64> {
    let n = grid.n();
    let c = grid.box_length() / 2.0;
    Array2::from_shape_fn((n, n), |(i, j)| {
        let (x, y) = (grid.coordinate(j) - c, aspect * (grid.coordinate(i) - c));
        f(x * x + y * y)
    })
}

fn ring_spectrum(grid: &GridSpec, spec: &ProfileSpec) -> Result<SpectralField> {
    let n = grid.n();
    let kappa = 2.0 * PI / spec.length_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut field = SpectralField::zeros(*grid);
    // fill one half-plane and mirror, so the field is real
    for r in 0..n {
        for c in 0..n {
            if grid.is_nyquist(r) || grid.is_nyquist(c) {
                continue;
            }
            let (k1, k2) = (grid.wavenumber_index(c), grid.wavenumber_index(r));
            if (k2, k1) <= (0, 0) {
                continue;
            }
            let (a, b) = grid.xi(r, c);
            let k = a.hypot(b);
            let amp: f64 = rng.gen_range(0.0..1.0);
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            if k >= 0.5 * kappa && k <= 1.5 * kappa {
                let v = Complex64::from_polar(amp, phase);
                field.coeffs_mut()[[r, c]] = v;
                field.coeffs_mut()[[(n - r) % n, (n - c) % n]] = v.conj();
            }
        }
    }
    let max = field
        .to_physical()
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Err(SqgError::invalid(
            "ring spectrum holds no lattice modes; enlarge n or ℓ",
        ));
    }
    Ok(field.scaled(spec.amplitude / max))
}

/// Sample `spec` on `grid`.
pub fn generate(spec: &ProfileSpec, grid: &GridSpec) -> Result<SpectralField> {
    spec.validate(grid)?;
    let a = spec.amplitude;
    let l2 = spec.length_scale * spec.length_scale;
    let field = match spec.kind {
        ProfileKind::Gaussian => forward_transform(
            &elliptic_field(grid, spec.aspect, |r2| a * (-r2 / (2.0 * l2)).exp()),
            grid,
        )?,
        ProfileKind::AlgebraicBump => forward_transform(
            &elliptic_field(grid, spec.aspect, |r2| a / (1.0 + r2 / l2).powi(2)),
            grid,
        )?,
        ProfileKind::SingleMode => {
            let n = grid.n() as i64;
            let k = ((grid.box_length() / spec.length_scale).round() as i64).clamp(1, n / 2 - 1);
            let mut f = SpectralField::zeros(*grid);
            f.coeffs_mut()[[0, grid.index_of(k)]] = Complex64::new(a / 2.0, 0.0);
            f.coeffs_mut()[[0, grid.index_of(-k)]] = Complex64::new(a / 2.0, 0.0);
            f
        }
        ProfileKind::RingSpectrumRandom => ring_spectrum(grid, spec)?,
    };
    match spec.target_norm {
        Some(t) => {
            let now = lp_norm(&field, t.p)?;
            if now == 0.0 {
                return Err(SqgError::invalid("cannot rescale the zero field"));
            }
            Ok(field.scaled(t.value / now))
        }
        None => Ok(field),
    }
}

/// `x ↦ λ·θ₀(x_c + λ(x − x_c))` about the box center `x_c`.
///
/// The truncated Fourier series of `θ₀` is evaluated at the dilated points,
/// one axis at a time.
pub fn lambda_rescale(theta0: &SpectralField, lambda: f64) -> Result<SpectralField> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(SqgError::invalid(format!(
            "lambda must lie in (0, 1], got {lambda}"
        )));
    }
    if lambda == 1.0 {
        return Ok(theta0.clone());
    }
    let grid = *theta0.grid();
    let n = grid.n();
    let c = grid.box_length() / 2.0;
    // e[j, k] = exp(i ξ_k y_j) at the dilated coordinate y_j
    let basis = Array2::from_shape_fn((n, n), |(j, k)| {
        if grid.is_nyquist(k) {
            return Complex64::new(0.0, 0.0);
        }
        let y = c + lambda * (grid.coordinate(j) - c);
        Complex64::from_polar(1.0, grid.wavenumber(k) * y)
    });
    // values[i, j] = Σ_{r,s} e[i, r] c[r, s] e[j, s]
    let values = basis.dot(theta0.coeffs()).dot(&basis.t());
    let real = values.mapv(|v| lambda * v.re);
    forward_transform(&real, &grid)
}

/// One `λ` of the slow-decay sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlowDecayPoint {
    pub lambda: f64,
    /// `‖θ^λ(T)‖_{L²}/‖θ₀^λ‖_{L²}`
    pub ratio: f64,
    /// `‖θ^λ(T) − K_α(T)*θ₀^λ‖_{L²}`, the transport contribution.
    pub deviation: f64,
    /// `λ·T^{1−1/(2α)}·‖θ₀‖²_{L⁴}`, the scale bounding `deviation` up to a constant.
    pub scale: f64,
}

/// Simulate every dilation `θ₀^λ` to `T` independently.
pub fn slow_decay_sweep(
    theta0: &SpectralField,
    lambdas: &[f64],
    t_final: f64,
    config: &SimConfig,
) -> Result<Vec<SlowDecayPoint>> {
    if lambdas.is_empty() {
        return Err(SqgError::invalid("lambda list is empty"));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SqgError::invalid("lambda list must be strictly decreasing"));
    }
    let mut cfg = config.clone();
    cfg.t_end = t_final;
    cfg.record_times = vec![t_final];
    cfg.validate()?;
    let l4_sq = lp_norm(theta0, 4.0)?.powi(2);
    let time_factor = t_final.powf(1.0 - 1.0 / (2.0 * cfg.alpha));
    lambdas
        .par_iter()
        .map(|&lambda| {
            let start = lambda_rescale(theta0, lambda)?;
            let tr = simulate(&start, &cfg)?;
            let end = tr.final_field().expect("one record time");
            let linear = linear_propagate(&start, cfg.alpha, t_final)?;
            Ok(SlowDecayPoint {
                lambda,
                ratio: (end.energy() / start.energy()).sqrt(),
                deviation: end.sub(&linear).energy().sqrt(),
                scale: lambda * time_factor * l4_sq,
            })
        })
        .collect()
}

/// `‖θ^λ(T)‖_{L²}/‖θ₀^λ‖_{L²}` for each `λ`.
pub fn slow_decay_experiment(
    theta0: &SpectralField,
    lambdas: &[f64],
    t_final: f64,
    config: &SimConfig,
) -> Result<Vec<(f64, f64)>> {
    Ok(slow_decay_sweep(theta0, lambdas, t_final, config)?
        .into_iter()
        .map(|p| (p.lambda, p.ratio))
        .collect())
}

/// Log-log fit of the gap `1 − ratio` against `λ`.
pub fn gap_scaling(results: &[(f64, f64)]) -> Result<LogLogFit> {
    let (l, g): (Vec<f64>, Vec<f64>) = results.iter().map(|(l, r)| (*l, 1.0 - r)).unzip();
    loglog_fit(&l, &g)
}
