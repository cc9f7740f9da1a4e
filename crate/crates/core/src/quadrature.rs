//! One-dimensional quadrature: Gauss–Legendre rules and adaptive Gauss–Kronrod.

// Node and weight tables are kept at their published precision.
#![allow(clippy::excessive_precision)]

use crate::{Result, SqgError};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Result of a single 15-point Kronrod panel: `(kronrod, gauss)`.
fn gk15_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, g * h)
}

/// Estimated integral with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Adaptive G7–K15 on `[a, b]`, bisecting the panel with the largest
/// `|K15 − G7|` until the total falls below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    const MAX_PANELS: usize = 2000;
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (k, g) = gk15_panel(&f, a, b);
    panels.push((a, b, k, (k - g).abs()));
    loop {
        let value: f64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(SqgError::Quadrature {
                achieved: f64::INFINITY,
                requested: abs_tol,
            });
        }
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target {
            return Ok(Estimate { value, error });
        }
        if panels.len() >= MAX_PANELS {
            return Err(SqgError::Quadrature {
                achieved: error,
                requested: target,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty panel list");
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (k, g) = gk15_panel(&f, l, h);
            panels.push((l, h, k, (k - g).abs()));
        }
    }
}

/// Integrate over consecutive breakpoints, sharing the absolute tolerance
/// evenly between panels.
pub fn integrate_panels(
    f: impl Fn(f64) -> f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    let n = breaks.len().saturating_sub(1).max(1) as f64;
    let mut total = Estimate {
        value: 0.0,
        error: 0.0,
    };
    for w in breaks.windows(2) {
        let e = integrate(&f, w[0], w[1], abs_tol / n, rel_tol)?;
        total.value += e.value;
        total.error += e.error;
    }
    Ok(total)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and its derivative
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre nodes and weights mapped onto a list of panels.
pub fn composite_gauss_legendre(breaks: &[f64], per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(per_panel);
    let mut nodes = Vec::with_capacity(per_panel * breaks.len());
    let mut weights = Vec::with_capacity(per_panel * breaks.len());
    for pair in breaks.windows(2) {
        let c = 0.5 * (pair[0] + pair[1]);
        let h = 0.5 * (pair[1] - pair[0]);
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(c + h * xi);
            weights.push(h * wi);
        }
    }
    (nodes, weights)
}

/// Composite trapezoid rule on a (possibly non-uniform) grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}
