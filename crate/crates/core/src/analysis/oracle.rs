//! Whole-plane radial quadratures: the linear-flow energy oracle, `f_m`, and
//! the shrinking-ball spectrum bound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::quadrature::integrate_panels;
use crate::{Result, SqgError};

/// Radial spectral shape multiplying the origin factor `r^order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum SpectrumShape {
    /// `1_{r ≤ radius}`
    Disk { radius: f64 },
    /// `e^{−w²r²/2}`
    Gaussian { width: f64 },
}

/// `θ̂₀(r) = r^{origin_order}·shape(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSpectrum {
    #[serde(flatten)]
    pub shape: SpectrumShape,
    pub origin_order: f64,
}

impl RadialSpectrum {
    pub fn flat_disk(radius: f64) -> Self {
        Self {
            shape: SpectrumShape::Disk { radius },
            origin_order: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.origin_order > -1.0) || !self.origin_order.is_finite() {
            return Err(SqgError::invalid(format!(
                "spectrum r^{} is not square integrable at the origin",
                self.origin_order
            )));
        }
        let ok = match self.shape {
            SpectrumShape::Disk { radius } => radius > 0.0 && radius.is_finite(),
            SpectrumShape::Gaussian { width } => width > 0.0 && width.is_finite(),
        };
        if !ok {
            return Err(SqgError::invalid(
                "spectrum scale must be positive and finite",
            ));
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> f64 {
        let base = if self.origin_order == 0.0 {
            1.0
        } else {
            r.powf(self.origin_order)
        };
        base * match self.shape {
            SpectrumShape::Disk { radius } => {
                if r <= radius {
                    1.0
                } else {
                    0.0
                }
            }
            SpectrumShape::Gaussian { width } => (-width * width * r * r / 2.0).exp(),
        }
    }

    /// Radius beyond which `|θ̂₀|²` is negligible (or zero).
    fn support(&self) -> f64 {
        match self.shape {
            SpectrumShape::Disk { radius } => radius,
            SpectrumShape::Gaussian { width } => {
                // e^{−w²r²} r^{2·order} < e^{−80} beyond this
                (80.0 + 2.0 * self.origin_order.max(0.0) * 10.0).sqrt() / width
            }
        }
    }
}

/// Geometric breakpoints `scale·2^k` clipped to `[0, end]`.
fn geometric_breaks(scale: f64, end: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut x = scale / 64.0;
    while x < end {
        b.push(x);
        x *= 2.0;
    }
    b.push(end);
    b
}

/// `2π∫₀^∞ e^{−2r^{2α}t}|θ̂₀(r)|² r dr` (unitary transform normalization).
fn linear_energy(profile: &RadialSpectrum, alpha: f64, t: f64) -> Result<f64> {
    let end = profile.support();
    let scale = if t > 0.0 {
        (1.0 / t).powf(1.0 / (2.0 * alpha)).min(end)
    } else {
        end
    };
    let breaks = geometric_breaks(scale, end);
    let two_a = 2.0 * alpha;
    let f = |r: f64| {
        let v = profile.value(r);
        2.0 * PI * (-2.0 * r.powf(two_a) * t).exp() * v * v * r
    };
    // a rough magnitude sets the absolute floor so the relative target governs
    let rough = integrate_panels(f, &breaks, 0.0, 1e-6)?.value;
    Ok(integrate_panels(f, &breaks, 1e-15 * rough, 1e-12)?.value)
}

/// `‖K_α(t)*θ₀‖_{L²}` on the plane at each time.
pub fn linear_decay_oracle(
    profile: &RadialSpectrum,
    alpha: f64,
    times: &[f64],
) -> Result<Vec<f64>> {
    profile.validate()?;
    crate::evolution::validate_alpha(alpha)?;
    times
        .iter()
        .map(|&t| {
            if !(t >= 0.0) {
                return Err(SqgError::invalid(format!("time must be >= 0, got {t}")));
            }
            linear_energy(profile, alpha, t).map(f64::sqrt)
        })
        .collect()
}

/// `f_m(t) = ∫_{|ξ|>1} |ξ|^{2α} e^{−m|ξ|^{2α}t} dξ`.
///
/// With `u = r^{2α}` this is `(π/α)∫₁^∞ u^{1/α} e^{−mtu} du`.
pub fn f_m(t: f64, m_coef: f64, alpha: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(SqgError::invalid(format!("f_m needs t > 0, got {t}")));
    }
    if !(m_coef > 0.0) {
        return Err(SqgError::invalid(format!("f_m needs m > 0, got {m_coef}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SqgError::invalid("f_m needs alpha in (0, 1]"));
    }
    let mt = m_coef * t;
    // substitute u = 1 + v/(mt): the integrand becomes e^{−mt}·(1 + v/mt)^{1/α}e^{−v}/(mt)
    let p = 1.0 / alpha;
    let g = |v: f64| (1.0 + v / mt).powf(p) * (-v).exp();
    let mut breaks = vec![0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    let mut end = 64.0;
    while g(end) > 1e-18 * g(0.0) {
        end *= 2.0;
        breaks.push(end);
    }
    let integral = integrate_panels(g, &breaks, 0.0, 1e-13)?.value;
    Ok(PI / alpha * (-mt).exp() / mt * integral)
}

/// `C` such that `f_m(t) ≤ C/(mt)²` is tight at `t₀`, and whether the bound
/// then holds on every later time.
pub fn f_m_bound_check(times: &[f64], m_coef: f64, alpha: f64) -> Result<(f64, bool)> {
    let t0 = *times
        .first()
        .ok_or_else(|| SqgError::invalid("need at least one time"))?;
    let c = f_m(t0, m_coef, alpha)? * (m_coef * t0).powi(2);
    let mut ok = true;
    for &t in times {
        ok &= f_m(t, m_coef, alpha)? <= c / (m_coef * t).powi(2) * (1.0 + 1e-12);
    }
    Ok((c, ok))
}

/// Positive continuous time weights for the ball radius `g(t)^{−1/(2α)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BallScale {
    Constant {
        value: f64,
    },
    Power {
        exponent: f64,
    },
    /// `(1/2 + 1/(2α))(e + t) ln(e + t)`
    LogLinear,
}

impl BallScale {
    pub fn eval(&self, t: f64, alpha: f64) -> f64 {
        match *self {
            BallScale::Constant { value } => value,
            BallScale::Power { exponent } => t.powf(exponent),
            BallScale::LogLinear => {
                let e = std::f64::consts::E;
                (0.5 + 0.5 / alpha) * (e + t) * (e + t).ln()
            }
        }
    }
}

/// `∫_{|ξ| ≤ g(t)^{−1/(2α)}} |ĥ|² dξ` against `C g(t)^{−(1/α)(2/p−1)}`, with `C`
/// calibrated at the first time. Returns `(measured, bound)` pairs.
pub fn ball_spectrum_bound_probe(
    profile: &RadialSpectrum,
    p: f64,
    alpha: f64,
    g: BallScale,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    profile.validate()?;
    if !(1.0..2.0).contains(&p) {
        return Err(SqgError::invalid(format!("p must lie in [1, 2), got {p}")));
    }
    if times.is_empty() {
        return Err(SqgError::invalid("need at least one time"));
    }
    let exponent = -(1.0 / alpha) * (2.0 / p - 1.0);
    let mut out = Vec::with_capacity(times.len());
    let mut c = None;
    for &t in times {
        let gt = g.eval(t, alpha);
        if !(gt > 0.0 && gt.is_finite()) {
            return Err(SqgError::invalid(format!("g({t}) must be positive")));
        }
        let radius = gt.powf(-1.0 / (2.0 * alpha)).min(profile.support());
        let f = |r: f64| {
            let v = profile.value(r);
            2.0 * PI * v * v * r
        };
        let measured = integrate_panels(f, &[0.0, radius], 0.0, 1e-12)?.value;
        let shape = gt.powf(exponent);
        let cc = *c.get_or_insert(measured / shape);
        out.push((measured, cc * shape));
    }
    Ok(out)
}
