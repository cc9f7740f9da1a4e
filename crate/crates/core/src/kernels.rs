//! The fractional heat kernel `K_α(t)` on the plane, the inverse Fourier
//! transform of `e^{−|ξ|^{2α}t}`, and probes of its norm scalings.
//!
//! Radial values come from Hankel-type integrals
//! `(1/2π)∫₀^∞ (−r^{2α})^j e^{−r^{2α}t} J₀(rρ) r dr` evaluated by adaptive
//! Gauss–Kronrod with panel breaks at Bessel zeros. Beyond `50·t^{1/(2α)}` the
//! kernel is replaced by its convergent-in-practice far-field series
//! `Σ_k c_k t^k ρ^{−2−2kα}`, which vanishes identically at `α = 1`.

use std::f64::consts::PI;

use ndarray::Zip;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::analysis::fit::loglog_fit;
use crate::bessel::{approx_zero, j0, j1};
use crate::quadrature::{composite_gauss_legendre, integrate, integrate_panels};
use crate::spectral::{lp_norm_values, riesz_velocity, SpectralField};
use crate::{Result, SqgError};

/// Exponent at which `e^{−x}` is negligible against unit-size data.
const CUTOFF_EXPONENT: f64 = 45.0;
/// Radial grid breaks in units of `t^{1/(2α)}`.
const GRID_BREAKS: [f64; 9] = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 50.0];
const NODES_PER_PANEL: usize = 20;
const FAR_FIELD_TERMS: usize = 6;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(SqgError::invalid(format!(
            "kernel exponent alpha must lie in (0, 1], got {alpha}"
        )))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(SqgError::invalid(format!("time must be positive, got {t}")))
    }
}

/// `(1/2π)∫₀^∞ (−r^{2α})^j e^{−r^{2α}t} w(r) J_ν(rρ) r^{1+ν} dr`, negated for
/// `ν = 1` so the result is `∂_ρ` of the `ν = 0` transform. `weight` must be
/// at most 1 and non-increasing so the exponential cutoff stays valid.
#[allow(clippy::too_many_arguments)]
fn radial_transform(
    rho: f64,
    t: f64,
    alpha: f64,
    j: u32,
    nu: u32,
    cutoff: f64,
    weight: &(dyn Fn(f64) -> f64 + Sync),
    abs_tol: f64,
) -> Result<f64> {
    let two_a = 2.0 * alpha;
    let integrand = |r: f64| {
        let ra = r.powf(two_a);
        let base = (-ra * t).exp() * weight(r);
        let dj = if j == 0 { 1.0 } else { (-ra).powi(j as i32) };
        let bess = if nu == 0 {
            j0(r * rho)
        } else {
            j1(r * rho) * r
        };
        dj * base * bess * r
    };
    let mut breaks = vec![0.0];
    if rho * cutoff > 10.0 {
        let mut k = 1;
        loop {
            let z = approx_zero(nu, k);
            if z >= rho * cutoff {
                break;
            }
            if z > 10.0 {
                breaks.push(z / rho);
            }
            k += 1;
        }
    }
    breaks.push(cutoff);
    let est = integrate_panels(integrand, &breaks, abs_tol, 1e-13)?;
    let sign = if nu == 1 { -1.0 } else { 1.0 };
    Ok(sign * est.value / (2.0 * PI))
}

/// `r` beyond which `e^{−r^{2α}t}` (times `r^{2αj}`) is negligible.
fn kernel_cutoff(t: f64, alpha: f64, j: u32) -> f64 {
    let base = (CUTOFF_EXPONENT / t).powf(1.0 / (2.0 * alpha));
    // room for the polynomial factor of time derivatives
    base * (1.0 + 0.25 * j as f64)
}

/// `K_α(x, t)` as a function of `|x|`.
pub fn kernel_eval(x_radius: f64, t: f64, alpha: f64) -> Result<f64> {
    check_time(t)?;
    check_alpha(alpha)?;
    let cutoff = kernel_cutoff(t, alpha, 0);
    radial_transform(x_radius.abs(), t, alpha, 0, 0, cutoff, &|_| 1.0, 1e-10)
}

/// Coefficients `c_k` of the far field `K_α(ρ, t) ~ Σ_k c_k t^k ρ^{−2−2kα}`.
fn far_field_coefficients(alpha: f64) -> Vec<f64> {
    (1..=FAR_FIELD_TERMS)
        .map(|k| {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let mag = (2.0 * ln_gamma(kf * alpha + 1.0) - ln_gamma(kf + 1.0)
                + 2.0 * kf * alpha * 2.0_f64.ln())
            .exp();
            // sin(kαπ) vanishes exactly when kα is an integer
            let sine = if (kf * alpha).fract() == 0.0 {
                0.0
            } else {
                (kf * alpha * PI).sin()
            };
            sign * mag * sine / (PI * PI)
        })
        .collect()
}

/// Far-field series for `∂_t^j ∂_ρ^ν K_α(ρ, t)`.
fn far_field(rho: f64, t: f64, alpha: f64, j: u32, nu: u32, coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = (i + 1) as u32;
            if k < j {
                return 0.0;
            }
            let falling: f64 = (0..j).map(|m| (k - m) as f64).product();
            let s = 2.0 + 2.0 * k as f64 * alpha;
            let tk = t.powi((k - j) as i32);
            let radial = if nu == 0 {
                rho.powf(-s)
            } else {
                -s * rho.powf(-s - 1.0)
            };
            c * falling * tk * radial
        })
        .sum()
}

/// Multi-index `(β₁, β₂)` or `(γ₁, γ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MultiIndex(pub u32, pub u32);

impl MultiIndex {
    pub fn order(&self) -> u32 {
        self.0 + self.1
    }
}

/// `∫₀^{2π} |cos φ|^a |sin φ|^b dφ = 2B((a+1)/2, (b+1)/2)`.
fn angular_integral(a: f64, b: f64) -> f64 {
    let (x, y) = ((a + 1.0) / 2.0, (b + 1.0) / 2.0);
    2.0 * (ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp()
}

/// `max_φ |cos φ|^a |sin φ|^b`.
fn angular_max(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 1.0;
    }
    let s = a + b;
    (a / s).powf(a / 2.0) * (b / s).powf(b / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelProbeReport {
    pub alpha: f64,
    pub probe_id: String,
    pub times: Vec<f64>,
    pub measured_norms: Vec<f64>,
    pub predicted_exponent: f64,
    pub fitted_exponent: f64,
    /// Largest measured/predicted ratio after normalizing at the first time.
    pub max_ratio: f64,
    /// Normalized ratio per time; empty for scaling probes.
    pub ratios: Vec<f64>,
}

impl KernelProbeReport {
    /// Running sup of `ratios` over all earlier times.
    pub fn cumulative_sup(&self) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.ratios
            .iter()
            .map(|r| {
                best = best.max(*r);
                best
            })
            .collect()
    }

    /// `(max − min)/max` of the running sup over the last decade of times.
    pub fn last_decade_variation(&self) -> f64 {
        let Some(&t_last) = self.times.last() else {
            return f64::NAN;
        };
        let sup = self.cumulative_sup();
        let tail: Vec<f64> = self
            .times
            .iter()
            .zip(&sup)
            .filter(|(t, _)| **t >= t_last / 10.0 * (1.0 - 1e-12))
            .map(|(_, s)| *s)
            .collect();
        let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        (hi - lo) / hi
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SqgError::invalid(
            "times must be strictly increasing with at least two entries",
        ));
    }
    check_time(times[0])?;
    if times[times.len() - 1] / times[0] < 100.0 * (1.0 - 1e-12) {
        return Err(SqgError::invalid("times must span at least two decades"));
    }
    Ok(())
}

/// `(|γ|−|β|)/(2α) − j − (p−1)/(pα)`.
pub fn scaling_exponent(gamma: MultiIndex, beta: MultiIndex, j: u32, p: f64, alpha: f64) -> f64 {
    let tail = if p.is_infinite() {
        1.0 / alpha
    } else {
        (p - 1.0) / (p * alpha)
    };
    (gamma.order() as f64 - beta.order() as f64) / (2.0 * alpha) - j as f64 - tail
}

/// `‖x^γ ∂_t^j ∂^β K_α(t)‖_{L^p(ℝ²)}` for `|β| ≤ 1`.
pub fn kernel_norm(
    gamma: MultiIndex,
    beta: MultiIndex,
    j: u32,
    p: f64,
    alpha: f64,
    t: f64,
) -> Result<f64> {
    check_time(t)?;
    check_alpha(alpha)?;
    let nu = beta.order();
    if nu > 1 {
        return Err(SqgError::invalid(
            "derivative order |beta| > 1 is not supported",
        ));
    }
    if !(p >= 1.0) {
        return Err(SqgError::invalid(format!(
            "L^p exponent must be >= 1, got {p}"
        )));
    }
    let g = gamma.order() as f64;
    let scale = t.powf(1.0 / (2.0 * alpha));
    let cutoff = kernel_cutoff(t, alpha, j);
    // relative accuracy is kept uniform across t by scaling the tolerance
    let magnitude = t.powf(-1.0 / alpha - j as f64 - nu as f64 / (2.0 * alpha));
    let tol = 1e-11 * magnitude;
    let breaks: Vec<f64> = GRID_BREAKS.iter().map(|b| b * scale).collect();
    let (nodes, weights) = composite_gauss_legendre(&breaks, NODES_PER_PANEL);
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|&rho| radial_transform(rho, t, alpha, j, nu, cutoff, &|_| 1.0, tol))
        .collect::<Result<_>>()?;

    let a = p_or_zero(p, (gamma.0 + beta.0) as f64);
    let b = p_or_zero(p, (gamma.1 + beta.1) as f64);
    let coeffs = far_field_coefficients(alpha);
    let r_far = *breaks.last().expect("non-empty breaks");

    if p.is_infinite() {
        let ang = angular_max((gamma.0 + beta.0) as f64, (gamma.1 + beta.1) as f64);
        let inner = nodes
            .iter()
            .zip(&values)
            .map(|(r, h)| r.powf(g) * h.abs())
            .fold(0.0, f64::max);
        return Ok(ang * inner);
    }

    let inner: f64 = nodes
        .iter()
        .zip(&weights)
        .zip(&values)
        .map(|((r, w), h)| w * r.powf(p * g + 1.0) * h.abs().powf(p))
        .sum();
    // ρ = R/u maps the far field onto u ∈ (0, 1]
    let tail = integrate(
        |u: f64| {
            if u == 0.0 {
                return 0.0;
            }
            let rho = r_far / u;
            let h = far_field(rho, t, alpha, j, nu, &coeffs);
            rho.powf(p * g + 1.0) * h.abs().powf(p) * r_far / (u * u)
        },
        0.0,
        1.0,
        1e-14 * inner,
        1e-10,
    )?
    .value;
    Ok((angular_integral(a, b) * (inner + tail)).powf(1.0 / p))
}

fn p_or_zero(p: f64, k: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        p * k
    }
}

/// `2π∫₀^∞ K_α(ρ, t) ρ dρ`, which should equal `K̂(0) = 1`.
pub fn kernel_mass(t: f64, alpha: f64) -> Result<f64> {
    // the kernel is positive, so its mass is its L¹ norm
    kernel_norm(MultiIndex(0, 0), MultiIndex(0, 0), 0, 1.0, alpha, t)
}

/// Fit the time exponent of `‖x^γ ∂_t^j ∂^β K_α(t)‖_{L^p}` over `times`.
pub fn kernel_norm_scaling_probe(
    gamma: MultiIndex,
    beta: MultiIndex,
    j: u32,
    p: f64,
    alpha: f64,
    times: &[f64],
) -> Result<KernelProbeReport> {
    check_alpha(alpha)?;
    check_times(times)?;
    let g = gamma.order() as f64;
    let limit = beta.order() as f64 + 2.0 * alpha * j.max(1) as f64;
    if !(g < limit) {
        return Err(SqgError::invalid(format!(
            "scaling hypothesis violated: |gamma| = {g} must be < |beta| + 2 alpha max(j,1) = {limit}"
        )));
    }
    let norms: Vec<f64> = times
        .iter()
        .map(|&t| kernel_norm(gamma, beta, j, p, alpha, t))
        .collect::<Result<_>>()?;
    let predicted = scaling_exponent(gamma, beta, j, p, alpha);
    let fit = loglog_fit(times, &norms)?;
    let max_ratio = times
        .iter()
        .zip(&norms)
        .map(|(t, n)| (n / norms[0]) / (t / times[0]).powf(predicted))
        .fold(0.0, f64::max);
    Ok(KernelProbeReport {
        alpha,
        probe_id: format!(
            "gamma=({},{}) beta=({},{}) j={} p={}",
            gamma.0, gamma.1, beta.0, beta.1, j, p
        ),
        times: times.to_vec(),
        measured_norms: norms,
        predicted_exponent: predicted,
        fitted_exponent: fit.slope,
        max_ratio,
        ratios: Vec::new(),
    })
}

/// Radial test profiles with closed-form Fourier transforms and norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// `e^{−ρ²/(2σ²)}`.
    Gaussian { sigma: f64 },
    /// `(1 + ρ²)^{−3/2}`.
    AlgebraicBump,
}

impl TestFunction {
    /// Transform `f̂(r) = ∫ f e^{−ix·ξ} dx` at `|ξ| = r`.
    pub fn fourier(&self, r: f64) -> f64 {
        match *self {
            TestFunction::Gaussian { sigma } => {
                2.0 * PI * sigma * sigma * (-sigma * sigma * r * r / 2.0).exp()
            }
            TestFunction::AlgebraicBump => 2.0 * PI * (-r).exp(),
        }
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return 1.0;
        }
        let pp = match *self {
            TestFunction::Gaussian { sigma } => 2.0 * PI * sigma * sigma / p,
            TestFunction::AlgebraicBump => 2.0 * PI / (3.0 * p - 2.0),
        };
        pp.powf(1.0 / p)
    }

    fn width(&self) -> f64 {
        match *self {
            TestFunction::Gaussian { sigma } => sigma,
            TestFunction::AlgebraicBump => 1.0,
        }
    }

    /// Frequency where `e^{−r^{2α}t} f̂(r)/f̂(0)` drops below `e^{−45}`.
    fn cutoff(&self, t: f64, alpha: f64) -> f64 {
        let decay = |r: f64| {
            let own = match *self {
                TestFunction::Gaussian { sigma } => sigma * sigma * r * r / 2.0,
                TestFunction::AlgebraicBump => r,
            };
            r.powf(2.0 * alpha) * t + own
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while decay(hi) < CUTOFF_EXPONENT {
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if decay(mid) < CUTOFF_EXPONENT {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// `‖K_α(t) * f‖_{L^q}` for a radial test profile.
pub fn smoothed_norm(f: TestFunction, q: f64, alpha: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    check_alpha(alpha)?;
    let cutoff = f.cutoff(t, alpha);
    let f0 = f.fourier(0.0);
    let weight = move |r: f64| f.fourier(r) / f0;
    let scale = t.powf(1.0 / (2.0 * alpha)).max(f.width());
    let breaks: Vec<f64> = GRID_BREAKS.iter().map(|b| b * scale).collect();
    let (nodes, weights) = composite_gauss_legendre(&breaks, NODES_PER_PANEL);
    let tol = 1e-13 * scale.powi(-2);
    let eval =
        |rho: f64| radial_transform(rho, t, alpha, 0, 0, cutoff, &weight, tol).map(|v| v * f0);
    let values: Vec<f64> = nodes.par_iter().map(|&r| eval(r)).collect::<Result<_>>()?;
    if q.is_infinite() {
        return Ok(values.iter().fold(eval(0.0)?.abs(), |m, v| m.max(v.abs())));
    }
    let inner: f64 = nodes
        .iter()
        .zip(&weights)
        .zip(&values)
        .map(|((r, w), v)| w * r * v.abs().powf(q))
        .sum();
    // power-law tail g ~ C ρ^{−s} fitted through ρ = R/2 and ρ = R
    let r_far = *breaks.last().expect("non-empty breaks");
    let g1 = eval(r_far / 2.0)?.abs();
    let g2 = eval(r_far)?.abs();
    let tail = if g1 > 0.0 && g2 > 0.0 && g1 > g2 {
        let s = (g1 / g2).ln() / 2.0_f64.ln();
        let decay = q * s - 2.0;
        if decay > 0.0 {
            g2.powf(q) * r_far.powi(2) / decay
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok((2.0 * PI * (inner + tail)).powf(1.0 / q))
}

/// Normalized smoothing ratios `‖K_α(t)f‖_q t^{(1/α)(1/p−1/q)}/‖f‖_p`, maximized
/// over the test profiles at each time.
pub fn smoothing_estimate_probe(
    p: f64,
    q: f64,
    alpha: f64,
    test_functions: &[TestFunction],
    times: &[f64],
) -> Result<KernelProbeReport> {
    if !(p >= 1.0 && p <= q) {
        return Err(SqgError::invalid(format!(
            "need 1 <= p <= q, got p = {p}, q = {q}"
        )));
    }
    if test_functions.is_empty() {
        return Err(SqgError::invalid("at least one test function is required"));
    }
    check_alpha(alpha)?;
    check_times(times)?;
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    let decay = (1.0 / alpha) * (inv(p) - inv(q));
    let mut measured = Vec::with_capacity(times.len());
    let mut ratios = Vec::with_capacity(times.len());
    for &t in times {
        let mut best = 0.0_f64;
        for f in test_functions {
            best = best.max(smoothed_norm(*f, q, alpha, t)? / f.lp_norm(p));
        }
        measured.push(best);
        ratios.push(best * t.powf(decay));
    }
    let t_last = times[times.len() - 1];
    let (tt, mm): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&measured)
        .filter(|(t, _)| **t >= t_last / 10.0 * (1.0 - 1e-12))
        .map(|(a, b)| (*a, *b))
        .unzip();
    let fitted = if tt.len() >= 2 {
        loglog_fit(&tt, &mm)?.slope
    } else {
        f64::NAN
    };
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(KernelProbeReport {
        alpha,
        probe_id: format!("p={p} q={q}"),
        times: times.to_vec(),
        measured_norms: measured,
        predicted_exponent: -decay,
        fitted_exponent: fitted,
        max_ratio,
        ratios,
    })
}

/// `‖u·∇θ‖_{L^{2/(μ+ν)}} / (‖θ‖_{L^{2/μ}} ‖∇θ‖_{L^{2/ν}})` on the grid.
pub fn bilinear_estimate_probe(
    eta: f64,
    mu: f64,
    nu: f64,
    alpha: f64,
    theta: &SpectralField,
) -> Result<f64> {
    crate::evolution::validate_alpha(alpha)?;
    let ok = |x: f64| x > 0.0 && x <= 2.0;
    if !(ok(eta) && ok(mu) && ok(nu) && eta <= mu + nu && mu + nu < 2.0) {
        return Err(SqgError::invalid(format!(
            "need 0 < eta <= mu + nu < 2 with eta, mu, nu in (0, 2]; got ({eta}, {mu}, {nu})"
        )));
    }
    if theta.energy() == 0.0 {
        return Ok(0.0);
    }
    let grid = theta.grid();
    let vel = riesz_velocity(theta);
    let [d1, d2] = theta.gradient();
    let (u1, u2) = (vel.u1.to_physical(), vel.u2.to_physical());
    let (g1, g2) = (d1.to_physical(), d2.to_physical());
    let adv = Zip::from(&u1)
        .and(&u2)
        .and(&g1)
        .and(&g2)
        .map_collect(|a, b, c, d| a * c + b * d);
    let grad = Zip::from(&g1).and(&g2).map_collect(|a, b| a.hypot(*b));
    let num = lp_norm_values(&adv, grid, 2.0 / (mu + nu))?;
    let den = lp_norm_values(&theta.to_physical(), grid, 2.0 / mu)?
        * lp_norm_values(&grad, grid, 2.0 / nu)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

/// `Γ(2/(2α))/(2α·2π) = K_α(0, 1)`.
pub fn kernel_at_origin(alpha: f64) -> f64 {
    gamma(1.0 / alpha) / (2.0 * alpha * 2.0 * PI)
}
