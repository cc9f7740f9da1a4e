//! Fourier-splitting diagnostics of the low/high frequency energy.
//!
//! With `φ = e^{−|ξ|^{2α}t}`, `ψ = 1 − φ` and `E(t) = (1+t)^k`, the high
//! frequency energy obeys `‖ψθ̂(t)‖² ≤ I + II + III + IV`, where the time
//! integrals run from the first recorded sample `s`.

use ndarray::Zip;
use serde::Serialize;

use crate::evolution::Trajectory;
use crate::quadrature::trapezoid;
use crate::spectral::{nonlinear_term, SpectralField};
use crate::{Result, SqgError};

/// Minimum samples for the time quadratures.
pub const MIN_SAMPLES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingReport {
    pub k: f64,
    pub alpha: f64,
    pub times: Vec<f64>,
    /// `‖θ̂‖²`
    pub energy: Vec<f64>,
    /// `‖φθ̂‖²`
    pub low_energy: Vec<f64>,
    /// `‖ψθ̂‖²`
    pub high_energy: Vec<f64>,
    pub term_i: Vec<f64>,
    /// Fourier-splitting bound: `E(t)⁻¹∫ E'(τ)∫_{B(τ)}|ψθ̂|² dξ dτ`.
    pub term_ii: Vec<f64>,
    /// `E(t)⁻¹∫ (E'‖ψθ̂‖² − 2E‖|ξ|^αψθ̂‖²) dτ` before splitting.
    pub term_ii_raw: Vec<f64>,
    pub term_iii: Vec<f64>,
    pub term_iv: Vec<f64>,
}

impl SplittingReport {
    /// Largest `(‖θ̂‖² − 2(low + high))/‖θ̂‖²` over samples; `≤ 0` when the
    /// triangle split holds.
    pub fn triangle_excess(&self) -> f64 {
        self.energy
            .iter()
            .zip(self.low_energy.iter().zip(&self.high_energy))
            .filter(|(e, _)| **e > 0.0)
            .map(|(e, (l, h))| (e - 2.0 * (l + h)) / e)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `(high − (I + II_raw + III + IV))/‖θ̂(s)‖²` over samples.
    ///
    /// Zero up to the time quadrature error of the recording grid.
    pub fn identity_excess(&self) -> f64 {
        let e0 = self
            .energy
            .first()
            .copied()
            .unwrap_or(1.0)
            .max(f64::MIN_POSITIVE);
        (0..self.times.len())
            .map(|i| {
                let rhs = self.term_i[i] + self.term_ii_raw[i] + self.term_iii[i] + self.term_iv[i];
                (self.high_energy[i] - rhs) / e0
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `[I, II, III, IV]` at sample `i`.
    pub fn terms_at(&self, i: usize) -> [f64; 4] {
        [
            self.term_i[i],
            self.term_ii[i],
            self.term_iii[i],
            self.term_iv[i],
        ]
    }
}

fn weight(t: f64, k: f64) -> f64 {
    (1.0 + t).powf(k)
}

fn weight_rate(t: f64, k: f64) -> f64 {
    k * (1.0 + t).powf(k - 1.0)
}

/// Per-sample integrands, already multiplied by `E` or `E'`.
struct Integrands {
    energy: f64,
    low: f64,
    high: f64,
    ball: f64,
    raw: f64,
    iii: f64,
    iv: f64,
}

fn integrands(
    theta: &SpectralField,
    t: f64,
    k: f64,
    alpha: f64,
    nonlin: Option<&SpectralField>,
) -> Integrands {
    let grid = theta.grid();
    let area = grid.box_length().powi(2);
    let xi = grid.xi_norm();
    let ball_r = (k / (2.0 * (1.0 + t))).powf(1.0 / (2.0 * alpha));
    let two_a = 2.0 * alpha;
    let (mut energy, mut low, mut high, mut ball, mut diss, mut iii) =
        (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    Zip::from(theta.coeffs()).and(&xi).for_each(|c, &r| {
        let a2 = c.norm_sqr();
        let lam = r.powf(two_a);
        let phi = (-lam * t).exp();
        let psi = 1.0 - phi;
        energy += a2;
        low += phi * phi * a2;
        high += psi * psi * a2;
        if r <= ball_r {
            ball += psi * psi * a2;
        }
        diss += lam * psi * psi * a2;
        iii += lam * phi * psi * a2;
    });
    let iv = match nonlin {
        Some(n) => {
            let mut s = 0.0;
            Zip::from(n.coeffs())
                .and(theta.coeffs())
                .and(&xi)
                .for_each(|nc, c, &r| {
                    let psi = 1.0 - (-r.powf(two_a) * t).exp();
                    s += (nc * c.conj()).re * (1.0 - psi * psi);
                });
            (area * s).abs()
        }
        None => 0.0,
    };
    let (e, de) = (weight(t, k), weight_rate(t, k));
    Integrands {
        energy: area * energy,
        low: area * low,
        high: area * high,
        ball: de * area * ball,
        raw: de * area * high - 2.0 * e * area * diss,
        iii: e * area * iii,
        iv: e * iv,
    }
}

fn cumulative(times: &[f64], values: &[f64]) -> Vec<f64> {
    (0..times.len())
        .map(|i| trapezoid(&times[..=i], &values[..=i]))
        .collect()
}

/// Splitting diagnostics on every recorded sample, with reference time `s`
/// equal to the first sample.
pub fn splitting_report(trajectory: &Trajectory, k: f64) -> Result<SplittingReport> {
    if !(k > 2.0) || !k.is_finite() {
        return Err(SqgError::invalid(format!("k must exceed 2, got {k}")));
    }
    let n = trajectory.samples.len();
    if n < MIN_SAMPLES {
        return Err(SqgError::invalid(format!(
            "splitting needs at least {MIN_SAMPLES} samples, trajectory has {n}"
        )));
    }
    let cfg = &trajectory.config;
    let alpha = cfg.alpha;
    let rows: Vec<Integrands> = trajectory
        .samples
        .iter()
        .map(|(t, theta)| {
            let nl = cfg.nonlinear.then(|| nonlinear_term(theta, cfg.dealias));
            integrands(theta, *t, k, alpha, nl.as_ref())
        })
        .collect();
    let times = trajectory.times();
    let col = |f: fn(&Integrands) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let cum_ball = cumulative(&times, &col(|r| r.ball));
    let cum_raw = cumulative(&times, &col(|r| r.raw));
    let cum_iii = cumulative(&times, &col(|r| r.iii));
    let cum_iv = cumulative(&times, &col(|r| r.iv));

    let s = times[0];
    let high = col(|r| r.high);
    let es = weight(s, k);
    let inv_e: Vec<f64> = times.iter().map(|&t| 1.0 / weight(t, k)).collect();
    let scale = |v: &[f64], f: f64| {
        v.iter()
            .zip(&inv_e)
            .map(|(a, w)| f * a * w)
            .collect::<Vec<f64>>()
    };
    Ok(SplittingReport {
        k,
        alpha,
        term_i: inv_e.iter().map(|w| es * w * high[0]).collect(),
        term_ii: scale(&cum_ball, 1.0),
        term_ii_raw: scale(&cum_raw, 1.0),
        term_iii: scale(&cum_iii, 2.0),
        term_iv: scale(&cum_iv, 2.0),
        energy: col(|r| r.energy),
        low_energy: col(|r| r.low),
        high_energy: high,
        times,
    })
}
