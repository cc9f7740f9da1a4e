//! Bessel functions `J₀` and `J₁` of real argument.
//!
//! Small arguments use the trapezoid rule on the periodic Bessel integral
//! `J_n(x) = (1/2π)∫₀^{2π} cos(nτ − x sin τ) dτ`, which converges
//! geometrically once the node count exceeds `e·x/2`. Large arguments use the
//! Hankel asymptotic expansion, truncated at its smallest term.

use std::f64::consts::{FRAC_PI_4, PI};

const ASYMPTOTIC_FROM: f64 = 20.0;

fn trapezoid(order: u32, x: f64) -> f64 {
    let m = (std::f64::consts::E * x / 2.0).ceil() as usize + 24;
    let h = 2.0 * PI / m as f64;
    let n = order as f64;
    let s: f64 = (0..m)
        .map(|k| {
            let tau = k as f64 * h;
            (n * tau - x * tau.sin()).cos()
        })
        .sum();
    s / m as f64
}

fn hankel(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let z = 8.0 * x;
    // P = Σ (−1)^k a_{2k} / z^{2k}, Q = Σ (−1)^k a_{2k+1} / z^{2k+1}
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        let odd = (2 * k + 1) as f64;
        term *= (mu - odd * odd) / ((k + 1) as f64 * z);
    }
    let chi = x - (order as f64) * PI / 2.0 - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn bessel(order: u32, x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax == 0.0 {
        if order == 0 {
            1.0
        } else {
            0.0
        }
    } else if ax < ASYMPTOTIC_FROM {
        trapezoid(order, ax)
    } else {
        hankel(order, ax)
    };
    if x < 0.0 && order % 2 == 1 {
        -v
    } else {
        v
    }
}

pub fn j0(x: f64) -> f64 {
    bessel(0, x)
}

pub fn j1(x: f64) -> f64 {
    bessel(1, x)
}

/// McMahon approximation of the `k`-th positive zero of `J_n` (`k ≥ 1`).
///
/// Accurate to a few 1e−3 for the first zero and better beyond; used only to
/// place quadrature panel boundaries.
pub fn approx_zero(order: u32, k: usize) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let beta = (k as f64 + order as f64 / 2.0 - 0.25) * PI;
    beta - (mu - 1.0) / (8.0 * beta)
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * beta).powi(3))
}
