//! Decay fits against the catalog and the small grid-level probes.

use rayon::prelude::*;
use serde::Serialize;

use super::catalog::{catalog_rate, TheoremId};
use super::fit::fit_decay;
use crate::spectral::{lp_norm, nonlinear_term, Dealias, SpectralField};
use crate::{Result, SqgError};

/// `[0.1·t_end, 0.8·t_end]`.
pub fn default_fit_window(t_end: f64) -> (f64, f64) {
    (0.1 * t_end, 0.8 * t_end)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub q: f64,
    pub theorem: TheoremId,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub fit_window: (f64, f64),
    pub fitted_exponent: f64,
    pub r_squared: f64,
    pub catalog_exponent: f64,
    /// `|fitted − catalog|/|catalog|`, or the absolute gap when the catalog value is 0.
    pub relative_error: f64,
}

/// Fit `‖θ‖_{L^q}` over `window` and compare with the catalog exponent at
/// parameter `pq` (the measured `q`, or the data exponent `p` for theorems
/// indexed by the initial data).
pub fn decay_report(
    times: &[f64],
    norms: &[f64],
    q: f64,
    window: (f64, f64),
    theorem: TheoremId,
    pq: f64,
    alpha: f64,
) -> Result<DecayReport> {
    let (lo, hi) = window;
    let first = times.first().copied().unwrap_or(f64::NAN);
    let last = times.last().copied().unwrap_or(f64::NAN);
    if !(lo < hi && lo >= first && hi <= last) {
        return Err(SqgError::invalid(format!(
            "fit window [{lo}, {hi}] must lie inside the series [{first}, {last}]"
        )));
    }
    let catalog_exponent = catalog_rate(theorem, alpha, pq)?;
    let (fitted_exponent, r_squared) = fit_decay(times, norms, window)?;
    let gap = (fitted_exponent - catalog_exponent).abs();
    let relative_error = if catalog_exponent == 0.0 {
        gap
    } else {
        gap / catalog_exponent.abs()
    };
    Ok(DecayReport {
        q,
        theorem,
        times: times.to_vec(),
        norms: norms.to_vec(),
        fit_window: window,
        fitted_exponent,
        r_squared,
        catalog_exponent,
        relative_error,
    })
}

/// Several `(q, theorem)` fits over one sampled trajectory, in parallel.
///
/// `norms_of(q)` supplies the `L^q` series for each request.
pub fn decay_reports(
    times: &[f64],
    requests: &[(f64, TheoremId)],
    norms_of: impl Fn(f64) -> Result<Vec<f64>> + Sync,
    window: (f64, f64),
    alpha: f64,
) -> Result<Vec<DecayReport>> {
    requests
        .par_iter()
        .map(|&(q, id)| decay_report(times, &norms_of(q)?, q, window, id, q, alpha))
        .collect()
}

/// Index of the first sample with `‖θ‖_{L^m} ≤ κ`.
pub fn waiting_time_index(norms_m: &[f64], kappa: f64) -> Option<usize> {
    norms_m.iter().position(|v| *v <= kappa)
}

/// `max_{ξ≠0} |N̂(ξ)| / (|ξ|·‖θ‖²_{L²})` with `N = ∇·(uθ)` computed without
/// dealiasing and `N̂` in continuous normalization `L²·c_k`.
pub fn nonlinear_spectrum_bound_probe(theta: &SpectralField) -> Result<f64> {
    let e = theta.energy();
    if !(e > 0.0) {
        return Err(SqgError::invalid(
            "spectrum bound undefined for the zero field",
        ));
    }
    let grid = *theta.grid();
    let area = grid.box_length().powi(2);
    let n = nonlinear_term(theta, Dealias::None);
    let mut worst = 0.0_f64;
    for ((r, c), v) in n.coeffs().indexed_iter() {
        let (a, b) = grid.xi(r, c);
        let k = a.hypot(b);
        if k > 0.0 {
            worst = worst.max(area * v.norm() / (k * e));
        }
    }
    Ok(worst)
}

/// `‖θ‖_{L^q}` against `‖θ‖^a_{L^m}‖θ‖^{1−a}_{L^r}` with `a = (m/q)(r−q)/(r−m)`.
///
/// `r = ∞` is allowed, where `a = m/q`.
pub fn interpolation_check(theta: &SpectralField, m: f64, q: f64, r: f64) -> Result<(f64, f64)> {
    if !(m >= 1.0 && m <= q && q <= r && m < r) {
        return Err(SqgError::invalid(format!(
            "interpolation needs 1 <= m <= q <= r with m < r, got ({m}, {q}, {r})"
        )));
    }
    let a = if r.is_infinite() {
        m / q
    } else {
        (m / q) * (r - q) / (r - m)
    };
    let lhs = lp_norm(theta, q)?;
    let nm = lp_norm(theta, m)?;
    let nr = lp_norm(theta, r)?;
    Ok((lhs, nm.powf(a) * nr.powf(1.0 - a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fit::log_spaced;
    use crate::spectral::{forward_transform, GridSpec};
    use ndarray::Array2;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn smooth_random(n: usize, seed: u64) -> SpectralField {
        let grid = GridSpec::new(n, 2.0 * std::f64::consts::PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes: Vec<(f64, f64, f64, f64)> = (0..12)
            .map(|_| {
                (
                    rng.gen_range(-4..=4) as f64,
                    rng.gen_range(-4..=4) as f64,
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.0..6.3),
                )
            })
            .collect();
        let v = Array2::from_shape_fn((n, n), |(i, j)| {
            let (x, y) = (grid.coordinate(j), grid.coordinate(i));
            modes
                .iter()
                .map(|(a, b, c, p)| c * (a * x + b * y + p).cos())
                .sum()
        });
        forward_transform(&v, &grid).unwrap()
    }

    fn gaussian(n: usize) -> SpectralField {
        let grid = GridSpec::new(n, 20.0).unwrap();
        let v = Array2::from_shape_fn((n, n), |(i, j)| {
            let (x, y) = (grid.coordinate(j) - 10.0, grid.coordinate(i) - 10.0);
            (-(x * x + y * y) / 2.0).exp()
        });
        forward_transform(&v, &grid).unwrap()
    }

    #[test]
    fn decay_report_on_exact_power_law() {
        let t = log_spaced(1.0, 100.0, 30);
        let v: Vec<f64> = t.iter().map(|t| t.powf(-0.5)).collect();
        let r = decay_report(&t, &v, 1.0, (10.0, 80.0), TheoremId::Cw13, 1.0, 1.0).unwrap();
        assert!(r.relative_error < 1e-10);
        assert!(decay_report(&t, &v, 1.0, (0.5, 80.0), TheoremId::Cw13, 1.0, 1.0).is_err());
        assert_eq!(default_fit_window(10.0), (1.0, 8.0));
    }

    #[test]
    fn parallel_reports() {
        let t = log_spaced(1.0, 100.0, 30);
        let reqs = [(4.0, TheoremId::Thm15), (2.0, TheoremId::Ju14)];
        let out = decay_reports(
            &t,
            &reqs,
            |q| {
                Ok(t.iter()
                    .map(|t| t.powf(catalog_rate(TheoremId::Thm15, 1.0, q).unwrap()))
                    .collect())
            },
            (2.0, 80.0),
            1.0,
        )
        .unwrap();
        assert!(out[0].relative_error < 1e-10);
        assert!(out[1].relative_error < 1e-10);
    }

    #[test]
    fn waiting_time() {
        assert_eq!(waiting_time_index(&[3.0, 2.0, 1.0, 0.5], 1.0), Some(2));
        assert_eq!(waiting_time_index(&[3.0], 1.0), None);
    }

    #[test]
    fn single_mode_has_zero_ratio() {
        let grid = GridSpec::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let mut f = SpectralField::zeros(grid);
        f.coeffs_mut()[[0, 2]] = Complex64::new(0.5, 0.0);
        f.coeffs_mut()[[0, 14]] = Complex64::new(0.5, 0.0);
        assert!(nonlinear_spectrum_bound_probe(&f).unwrap() < 1e-14);
        assert!(nonlinear_spectrum_bound_probe(&SpectralField::zeros(grid)).is_err());
    }

    #[test]
    fn random_field_ratio_below_one_and_stable() {
        for seed in 0..4 {
            let a = nonlinear_spectrum_bound_probe(&smooth_random(64, seed)).unwrap();
            let b = nonlinear_spectrum_bound_probe(&smooth_random(128, seed)).unwrap();
            assert!(a > 0.0 && a < 1.0, "{a}");
            assert!((a - b).abs() < 0.1 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn interpolation_examples() {
        let g = gaussian(64);
        let (l, r) = interpolation_check(&g, 2.0, 3.0, 6.0).unwrap();
        assert!(l <= r * (1.0 + 1e-8));
        let (l, r) = interpolation_check(&g, 2.0, 2.0, 6.0).unwrap();
        assert!((l - r).abs() < 1e-14 * l);
        let (l, r) = interpolation_check(&g, 2.0, 6.0, 6.0).unwrap();
        assert!((l - r).abs() < 1e-14 * l);
        assert!(interpolation_check(&g, 2.0, 6.0, f64::INFINITY).is_ok());
        assert!(interpolation_check(&g, 3.0, 2.0, 6.0).is_err());
        assert!(interpolation_check(&g, 2.0, 2.0, 2.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn interpolation_holds(seed in 0u64..1000, m in 1.0f64..3.0, dq in 0.0f64..3.0, dr in 0.1f64..6.0) {
            let f = smooth_random(32, seed);
            let (l, r) = interpolation_check(&f, m, m + dq, m + dq + dr).unwrap();
            prop_assert!(l <= r * (1.0 + 1e-8));
        }
    }
}
