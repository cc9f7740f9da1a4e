//! Fourier representation of real scalar fields on the periodic box `[0, L)²`.
//!
//! Coefficients are stored with the mean-value normalization
//! `f(x) = Σ_k c_k e^{i ξ_k·x}`, `c_k = n⁻² Σ_j f_j e^{−i ξ_k·x_j}`, so a constant
//! field `f ≡ a` has `c_0 = a`. Arrays are indexed `[row, col]` with the row
//! following the `x₂` direction and the column the `x₁` direction; spectral
//! indices use the usual FFT order `0, 1, …, n/2−1, −n/2, …, −1`.

use std::cell::RefCell;
use std::f64::consts::PI;

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{Result, SqgError};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Uniform square grid on a periodic box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n_points: usize,
    box_length: f64,
}

impl GridSpec {
    pub fn new(n_points: usize, box_length: f64) -> Result<Self> {
        if n_points < 8 || !n_points.is_multiple_of(2) {
            return Err(SqgError::invalid(format!(
                "n_points must be an even integer >= 8, got {n_points}"
            )));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(SqgError::invalid(format!(
                "box_length must be positive and finite, got {box_length}"
            )));
        }
        Ok(Self {
            n_points,
            box_length,
        })
    }

    pub fn n(&self) -> usize {
        self.n_points
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n_points as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing() * self.spacing()
    }

    /// Physical coordinate of grid index `i` along either axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Signed integer wavenumber of array index `j`, in `[−n/2, n/2)`.
    pub fn wavenumber_index(&self, j: usize) -> i64 {
        let n = self.n_points as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Physical wavenumber `ξ = 2πk/L` of array index `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * self.wavenumber_index(j) as f64 / self.box_length
    }

    /// Array index holding integer wavenumber `k` (taken modulo `n`).
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n_points as i64) as usize
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n_points / 2
    }

    /// `(ξ₁, ξ₂)` for the coefficient stored at `[row, col]`.
    pub fn xi(&self, row: usize, col: usize) -> (f64, f64) {
        (self.wavenumber(col), self.wavenumber(row))
    }

    /// `|ξ|` on the full coefficient lattice.
    pub fn xi_norm(&self) -> Array2<f64> {
        let n = self.n_points;
        Array2::from_shape_fn((n, n), |(r, c)| {
            let (a, b) = self.xi(r, c);
            a.hypot(b)
        })
    }
}

/// Dealiasing rule for quadratic products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dealias {
    None,
    /// Zero every mode with `|k_i| > n/3` in either direction.
    #[default]
    TwoThirds,
}

impl Dealias {
    pub fn retains(&self, grid: &GridSpec, row: usize, col: usize) -> bool {
        match self {
            Dealias::None => true,
            Dealias::TwoThirds => {
                let n = grid.n() as i64;
                let k1 = grid.wavenumber_index(col).abs();
                let k2 = grid.wavenumber_index(row).abs();
                3 * k1 <= n && 3 * k2 <= n
            }
        }
    }

    pub fn apply(&self, field: &mut SpectralField) {
        if *self == Dealias::None {
            return;
        }
        let grid = field.grid;
        for ((r, c), v) in field.coeffs.indexed_iter_mut() {
            if !self.retains(&grid, r, c) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Modal coefficients of a real scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Array2<Complex64>,
}

/// Velocity `(u₁, u₂)` recovered from a scalar through the Riesz multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u1: SpectralField,
    pub u2: SpectralField,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.n();
        Self {
            grid,
            coeffs: Array2::zeros((n, n)),
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Array2<Complex64>) -> Result<Self> {
        check_shape(&grid, coeffs.dim())?;
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(SqgError::invalid("spectral coefficients must be finite"));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Array2<Complex64> {
        self.coeffs
    }

    /// Coefficient of integer wavenumber `(k1, k2)`.
    pub fn mode(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[[self.grid.index_of(k2), self.grid.index_of(k1)]]
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[[0, 0]].re
    }

    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[[0, 0]] = Complex64::new(0.0, 0.0);
        out
    }

    pub fn to_physical(&self) -> Array2<f64> {
        inverse_transform(self)
    }

    /// `‖f‖²_{L²}` by Parseval: `L² Σ |c_k|²`.
    pub fn energy(&self) -> f64 {
        let l = self.grid.box_length();
        l * l * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// `L²` inner product `∫ f g dx` of two real fields.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        let l = self.grid.box_length();
        let s: f64 = Zip::from(&self.coeffs)
            .and(&other.coeffs)
            .fold(0.0, |acc, a, b| acc + (a * b.conj()).re);
        l * l * s
    }

    /// Largest violation of `c(−k) = conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0_f64;
        for r in 0..n {
            for c in 0..n {
                let rr = (n - r) % n;
                let cc = (n - c) % n;
                let d = (self.coeffs[[rr, cc]] - self.coeffs[[r, c]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Multiply every coefficient by a real symbol evaluated at `(ξ₁, ξ₂)`.
    pub fn apply_symbol(&self, symbol: impl Fn(f64, f64) -> f64) -> Self {
        let grid = self.grid;
        let mut out = self.clone();
        for ((r, c), v) in out.coeffs.indexed_iter_mut() {
            let (a, b) = grid.xi(r, c);
            *v *= symbol(a, b);
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.mapv(|c| c * factor),
        }
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        Self {
            grid: self.grid,
            coeffs: &self.coeffs - &other.coeffs,
        }
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        Self {
            grid: self.grid,
            coeffs: &self.coeffs + &other.coeffs,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Spectral partial derivatives `(∂₁f, ∂₂f)`; Nyquist modes are dropped so
    /// the results stay real.
    pub fn gradient(&self) -> [SpectralField; 2] {
        let grid = self.grid;
        let mut d1 = self.clone();
        let mut d2 = self.clone();
        for ((r, c), v) in self.coeffs.indexed_iter() {
            let (a, b) = grid.xi(r, c);
            let i = Complex64::new(0.0, 1.0);
            d1.coeffs[[r, c]] = if grid.is_nyquist(c) {
                0.0.into()
            } else {
                i * a * v
            };
            d2.coeffs[[r, c]] = if grid.is_nyquist(r) {
                0.0.into()
            } else {
                i * b * v
            };
        }
        [d1, d2]
    }

    /// `Λ^s f` for `s ≥ 0`.
    pub fn fractional_derivative(&self, s: f64) -> Result<Self> {
        let sym = fractional_symbol(s, &self.grid)?;
        let mut out = self.clone();
        Zip::from(&mut out.coeffs)
            .and(&sym)
            .for_each(|v, m| *v *= *m);
        Ok(out)
    }
}

fn check_shape(grid: &GridSpec, (rows, cols): (usize, usize)) -> Result<()> {
    if rows != grid.n() || cols != grid.n() {
        return Err(SqgError::DimensionMismatch {
            expected: grid.n(),
            rows,
            cols,
        });
    }
    Ok(())
}

fn fft2_in_place(data: &mut Array2<Complex64>, direction: FftDirection) {
    let (rows, cols) = data.dim();
    debug_assert_eq!(rows, cols);
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(cols, direction));
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for mut row in data.rows_mut() {
        let slice = row
            .as_slice_mut()
            .expect("spectral arrays are contiguous in row-major order");
        fft.process_with_scratch(slice, &mut scratch);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    for mut col in data.columns_mut() {
        for (dst, src) in column.iter_mut().zip(col.iter()) {
            *dst = *src;
        }
        fft.process_with_scratch(&mut column, &mut scratch);
        for (dst, src) in col.iter_mut().zip(column.iter()) {
            *dst = *src;
        }
    }
}

/// Physical samples → Fourier coefficients.
pub fn forward_transform(values: &Array2<f64>, grid: &GridSpec) -> Result<SpectralField> {
    check_shape(grid, values.dim())?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(SqgError::invalid("physical values must be finite"));
    }
    let mut data = values.mapv(|v| Complex64::new(v, 0.0));
    fft2_in_place(&mut data, FftDirection::Forward);
    let norm = 1.0 / (grid.n() * grid.n()) as f64;
    data.mapv_inplace(|c| c * norm);
    Ok(SpectralField {
        grid: *grid,
        coeffs: data,
    })
}

/// Fourier coefficients → physical samples (real part; the imaginary part is
/// round-off for Hermitian input).
pub fn inverse_transform(field: &SpectralField) -> Array2<f64> {
    let mut data = field.coeffs.clone();
    fft2_in_place(&mut data, FftDirection::Inverse);
    data.mapv(|c| c.re)
}

/// Multiplier `|ξ|^s` of `Λ^s`; the zero mode gets `0` for `s > 0` and `1` for `s = 0`.
pub fn fractional_symbol(s: f64, grid: &GridSpec) -> Result<Array2<f64>> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(SqgError::invalid(format!(
            "fractional power must be finite and >= 0, got {s}"
        )));
    }
    let mut m = grid.xi_norm();
    if s == 0.0 {
        m.fill(1.0);
    } else {
        m.mapv_inplace(|r| if r == 0.0 { 0.0 } else { r.powf(s) });
    }
    Ok(m)
}

/// `û₁ = iξ₂θ̂/|ξ|`, `û₂ = −iξ₁θ̂/|ξ|`, from `u = (−∂₂ψ, ∂₁ψ)` and `Λψ = −θ`.
///
/// The zero mode and every mode carrying a Nyquist index are set to zero, which
/// keeps `u` real and exactly divergence-free on the discrete lattice.
pub fn riesz_velocity(theta: &SpectralField) -> VelocityField {
    let grid = *theta.grid();
    let mut u1 = SpectralField::zeros(grid);
    let mut u2 = SpectralField::zeros(grid);
    let i = Complex64::new(0.0, 1.0);
    for ((r, c), v) in theta.coeffs.indexed_iter() {
        if grid.is_nyquist(r) || grid.is_nyquist(c) {
            continue;
        }
        let (a, b) = grid.xi(r, c);
        let mag = a.hypot(b);
        if mag == 0.0 {
            continue;
        }
        u1.coeffs[[r, c]] = i * (b / mag) * v;
        u2.coeffs[[r, c]] = -i * (a / mag) * v;
    }
    VelocityField { u1, u2 }
}

/// Pseudo-spectral `∇·(uθ)` with `u` the Riesz velocity of `θ`.
///
/// With [`Dealias::TwoThirds`] the input is truncated to the retained modes
/// first and the output is masked again, so the result equals the exact
/// convolution of the truncated field restricted to retained modes.
pub fn nonlinear_term(theta: &SpectralField, dealias: Dealias) -> SpectralField {
    let grid = *theta.grid();
    let mut th = theta.clone();
    dealias.apply(&mut th);
    let vel = riesz_velocity(&th);
    let t = inverse_transform(&th);
    let u1 = inverse_transform(&vel.u1);
    let u2 = inverse_transform(&vel.u2);
    let f1 = &u1 * &t;
    let f2 = &u2 * &t;
    // the products come from finite fields, so the transforms cannot fail
    let p1 = forward_transform(&f1, &grid).expect("finite product");
    let p2 = forward_transform(&f2, &grid).expect("finite product");
    let i = Complex64::new(0.0, 1.0);
    let mut out = SpectralField::zeros(grid);
    for ((r, c), v) in out.coeffs.indexed_iter_mut() {
        if grid.is_nyquist(r) || grid.is_nyquist(c) || !dealias.retains(&grid, r, c) {
            continue;
        }
        let (a, b) = grid.xi(r, c);
        *v = i * (a * p1.coeffs[[r, c]] + b * p2.coeffs[[r, c]]);
    }
    out
}

/// `(∫|f|^p dx)^{1/p}` by equal-weight quadrature of physical samples;
/// `p = ∞` gives the grid maximum of `|f|`.
pub fn lp_norm_values(values: &Array2<f64>, grid: &GridSpec, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(SqgError::invalid(format!(
            "L^p exponent must be >= 1, got {p}"
        )));
    }
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    // scaled by the maximum to keep large p from overflowing
    let s: f64 = values.iter().map(|v| (v.abs() / max).powf(p)).sum();
    Ok(max * (s * grid.cell_area()).powf(1.0 / p))
}

pub fn lp_norm(theta: &SpectralField, p: f64) -> Result<f64> {
    lp_norm_values(&theta.to_physical(), theta.grid(), p)
}

/// `‖ |∇θ| ‖_{L^p}` with the Euclidean norm of the gradient taken pointwise.
pub fn gradient_lp_norm(theta: &SpectralField, p: f64) -> Result<f64> {
    let [d1, d2] = theta.gradient();
    let g1 = d1.to_physical();
    let g2 = d2.to_physical();
    let mag = Zip::from(&g1).and(&g2).map_collect(|a, b| a.hypot(*b));
    lp_norm_values(&mag, theta.grid(), p)
}
