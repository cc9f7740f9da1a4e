//! Least-squares power-law fits in log-log coordinates.

use serde::Serialize;

use crate::{Result, SqgError};

/// Straight-line fit `ln y = intercept + slope·ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit over every pair; needs at least two points with `x, y > 0`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(SqgError::invalid(
            "log-log fit needs two aligned samples or more",
        ));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(SqgError::invalid(
            "log-log fit needs positive finite samples",
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SqgError::invalid("log-log fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy <= 1e-30 * (1.0 + my * my) {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    Ok(LogLogFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Slope of `ln norm` against `ln t` over samples inside `window`.
///
/// Returns `(exponent, r²)`; at least 8 samples must fall in the window.
pub fn fit_decay(times: &[f64], norms: &[f64], window: (f64, f64)) -> Result<(f64, f64)> {
    if times.len() != norms.len() {
        return Err(SqgError::invalid("times and norms must align"));
    }
    let (lo, hi) = window;
    let (t, v): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(norms)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(a, b)| (*a, *b))
        .unzip();
    if t.len() < 8 {
        return Err(SqgError::invalid(format!(
            "fit window [{lo}, {hi}] holds {} samples, need at least 8",
            t.len()
        )));
    }
    if v.iter().any(|x| !(*x > 0.0)) {
        return Err(SqgError::invalid(
            "norms must be positive inside the fit window",
        ));
    }
    let f = loglog_fit(&t, &v)?;
    Ok((f.slope, f.r_squared))
}

/// `n` points spaced evenly in `ln t` from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
