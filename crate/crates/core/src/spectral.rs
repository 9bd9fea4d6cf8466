//! Fourier pseudo-spectral operators on a doubly periodic rectangle.
//!
//! Fields live on the uniform grid `x_i = i·Lx/Nx`, `y_j = j·Ly/Ny` and are
//! stored row-major with `x` as the slow index. Differential operators act as
//! multipliers of `|κ|² = κ_x² + κ_y²`; integrals use the periodic trapezoidal
//! rule `⟨f, g⟩ = (Lx·Ly / (Nx·Ny)) Σ f·g`.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Mean-zero tolerance relative to the field's rms.
pub const MEAN_ZERO_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 4 || ny < 4 || !nx.is_multiple_of(2) || !ny.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "grid sizes must be even and at least 4, got {nx}x{ny}"
            )));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "domain lengths must be positive, got {lx}x{ly}"
            )));
        }
        Ok(Grid2D { nx, ny, lx, ly })
    }

    /// Square `n × n` grid on `(0, l)²`.
    pub fn square(n: usize, l: f64) -> Result<Self> {
        Self::new(n, n, l, l)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Quadrature weight of one grid point.
    pub fn cell_area(&self) -> f64 {
        self.area() / self.len() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy()
    }

    /// Signed alias of index `m` in `[−n/2, n/2)`.
    pub fn signed_mode(m: usize, n: usize) -> i64 {
        if m < n / 2 {
            m as i64
        } else {
            m as i64 - n as i64
        }
    }

    pub fn kx(&self, i: usize) -> f64 {
        TAU * Self::signed_mode(i, self.nx) as f64 / self.lx
    }

    pub fn ky(&self, j: usize) -> f64 {
        TAU * Self::signed_mode(j, self.ny) as f64 / self.ly
    }
}

/// Real grid function.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl Field2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Field2D {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        Field2D {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(Field2D { grid, values })
    }

    /// Samples `f(x, y)` at the grid points.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            let x = grid.x(i);
            for j in 0..grid.ny {
                values.push(f(x, grid.y(j)));
            }
        }
        Field2D { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.ny + j]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field2D {
        Field2D {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `a·self + b·other`, pointwise.
    pub fn lincomb(&self, a: f64, other: &Field2D, b: f64) -> Field2D {
        debug_assert_eq!(self.grid, other.grid);
        Field2D {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Field2D) -> Field2D {
        self.lincomb(1.0, other, -1.0)
    }

    pub fn add(&self, other: &Field2D) -> Field2D {
        self.lincomb(1.0, other, 1.0)
    }

    pub fn scale(&self, a: f64) -> Field2D {
        self.map(|v| a * v)
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &Field2D) {
        debug_assert_eq!(self.grid, other.grid);
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(&self.values) / self.values.len() as f64
    }

    /// Compensated sum of all values.
    pub fn sum(&self) -> f64 {
        compensated_sum(&self.values)
    }

    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Field2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn check_same_grid(&self, other: &Field2D) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

/// Unnormalised discrete Fourier coefficients of a real field, same layout as
/// [`Field2D`].
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum2D {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

impl Spectrum2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Spectrum2D {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &Spectrum2D) {
        for (c, x) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += *x * a;
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }
}

/// FFT plans and wavenumber tables for one grid. Cheap to clone and safe to
/// share between threads.
#[derive(Clone)]
pub struct SpectralOps {
    grid: Grid2D,
    fwd_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    k2: Arc<[f64]>,
    dealias_keep: Arc<[bool]>,
}

impl std::fmt::Debug for SpectralOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOps")
            .field("grid", &self.grid)
            .finish()
    }
}

impl SpectralOps {
    pub fn new(grid: Grid2D) -> Self {
        let mut planner = FftPlanner::new();
        let fwd_x = planner.plan_fft_forward(grid.nx);
        let fwd_y = planner.plan_fft_forward(grid.ny);
        let inv_x = planner.plan_fft_inverse(grid.nx);
        let inv_y = planner.plan_fft_inverse(grid.ny);
        let mut k2 = Vec::with_capacity(grid.len());
        let mut keep = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            let kx = grid.kx(i);
            let mx = Grid2D::signed_mode(i, grid.nx).unsigned_abs() as usize;
            for j in 0..grid.ny {
                let ky = grid.ky(j);
                let my = Grid2D::signed_mode(j, grid.ny).unsigned_abs() as usize;
                k2.push(kx * kx + ky * ky);
                keep.push(3 * mx <= grid.nx && 3 * my <= grid.ny);
            }
        }
        SpectralOps {
            grid,
            fwd_x,
            fwd_y,
            inv_x,
            inv_y,
            k2: k2.into(),
            dealias_keep: keep.into(),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// `|κ|²` per mode, same layout as the spectrum.
    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    fn check(&self, f: &Field2D) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch(format!(
                "field on {:?}, operators on {:?}",
                f.grid(),
                self.grid
            )));
        }
        Ok(())
    }

    fn transform(
        &self,
        data: &mut [Complex64],
        along_y: &Arc<dyn Fft<f64>>,
        along_x: &Arc<dyn Fft<f64>>,
    ) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        along_y.process(data);
        let mut t = vec![Complex64::new(0.0, 0.0); nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                t[j * nx + i] = data[i * ny + j];
            }
        }
        along_x.process(&mut t);
        for j in 0..ny {
            for i in 0..nx {
                data[i * ny + j] = t[j * nx + i];
            }
        }
    }

    pub fn forward(&self, f: &Field2D) -> Spectrum2D {
        assert_eq!(*f.grid(), self.grid, "field grid does not match operators");
        let mut coeffs: Vec<Complex64> =
            f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut coeffs, &self.fwd_y, &self.fwd_x);
        Spectrum2D {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn inverse(&self, s: &Spectrum2D) -> Field2D {
        let mut data = s.coeffs.clone();
        self.transform(&mut data, &self.inv_y, &self.inv_x);
        let scale = 1.0 / self.grid.len() as f64;
        Field2D {
            grid: self.grid,
            values: data.iter().map(|c| c.re * scale).collect(),
        }
    }

    /// Multiplies mode `(i, j)` by `m(|κ|²)`.
    pub fn apply_multiplier(&self, f: &Field2D, m: impl Fn(f64) -> f64) -> Field2D {
        let mut s = self.forward(f);
        for (c, &k2) in s.coeffs.iter_mut().zip(self.k2.iter()) {
            *c *= m(k2);
        }
        self.inverse(&s)
    }

    pub fn laplacian(&self, f: &Field2D) -> Field2D {
        self.apply_multiplier(f, |k2| -k2)
    }

    /// `(1 + Δ) f`.
    pub fn one_plus_lap(&self, f: &Field2D) -> Field2D {
        self.apply_multiplier(f, |k2| 1.0 - k2)
    }

    /// `(1 + Δ)² f`.
    pub fn one_plus_lap_sq(&self, f: &Field2D) -> Field2D {
        self.apply_multiplier(f, |k2| (1.0 - k2) * (1.0 - k2))
    }

    /// Checks `|mean(f)| <= 1e-10 · rms(f)`.
    pub fn check_mean_zero(f: &Field2D) -> Result<()> {
        let mean = f.mean();
        let rms = f.rms();
        if mean.abs() > MEAN_ZERO_TOL * rms {
            return Err(Error::NotMeanZero { mean, rms });
        }
        Ok(())
    }

    /// `(−Δ)⁻¹ f` on mean-zero fields; the result is mean-zero.
    pub fn inv_neg_laplacian(&self, f: &Field2D) -> Result<Field2D> {
        self.check(f)?;
        Self::check_mean_zero(f)?;
        Ok(self.apply_multiplier(f, |k2| if k2 == 0.0 { 0.0 } else { 1.0 / k2 }))
    }

    /// `(|Ω|/N²) Σ w(|κ|²) Re(a·b̄)`, the inner product of the fields behind
    /// two spectra with a radial multiplier.
    pub fn parseval(&self, a: &Spectrum2D, b: &Spectrum2D, weight: impl Fn(f64) -> f64) -> f64 {
        let n = self.grid.len() as f64;
        let s: f64 = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .zip(self.k2.iter())
            .map(|((x, y), &k2)| weight(k2) * (x * y.conj()).re)
            .sum();
        self.grid.area() / (n * n) * s
    }

    /// `⟨f, g⟩`.
    pub fn inner(&self, f: &Field2D, g: &Field2D) -> Result<f64> {
        self.check(f)?;
        f.check_same_grid(g)?;
        Ok(dot(f, g))
    }

    pub fn norm_l2(&self, f: &Field2D) -> f64 {
        dot(f, f).sqrt()
    }

    /// `‖f‖²₋₁ = ⟨(−Δ)⁻¹f, f⟩` on mean-zero fields.
    pub fn norm_hm1_sq(&self, f: &Field2D) -> Result<f64> {
        self.check(f)?;
        Self::check_mean_zero(f)?;
        Ok(self.norm_hm1_sq_spectrum(&self.forward(f)))
    }

    pub fn norm_hm1(&self, f: &Field2D) -> Result<f64> {
        Ok(self.norm_hm1_sq(f)?.sqrt())
    }

    /// `‖f‖²₋₁` from a spectrum, ignoring the zero mode.
    pub fn norm_hm1_sq_spectrum(&self, s: &Spectrum2D) -> f64 {
        self.parseval(s, s, |k2| if k2 == 0.0 { 0.0 } else { 1.0 / k2 })
    }

    /// `‖∇f‖²` by Parseval with multiplier `|κ|²`.
    pub fn gradient_norm_sq(&self, f: &Field2D) -> f64 {
        let s = self.forward(f);
        self.parseval(&s, &s, |k2| k2)
    }

    /// `⟨∇f, ∇g⟩`.
    pub fn grad_inner(&self, f: &Field2D, g: &Field2D) -> Result<f64> {
        self.check(f)?;
        f.check_same_grid(g)?;
        Ok(self.parseval(&self.forward(f), &self.forward(g), |k2| k2))
    }

    /// Zeroes every mode outside the central 2/3 of each direction.
    pub fn dealias(&self, s: &mut Spectrum2D) {
        for (c, &keep) in s.coeffs.iter_mut().zip(self.dealias_keep.iter()) {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Relative residuals of the Green formulas `⟨−Δv, w⟩ = ⟨∇v, ∇w⟩`,
/// `⟨Δ²v, w⟩ = ⟨Δv, Δw⟩` and `⟨Δ³v, w⟩ = −⟨∇Δv, ∇Δw⟩`, each scaled by the
/// Cauchy–Schwarz bound of its right-hand side.
pub fn green_residuals(ops: &SpectralOps, v: &Field2D, w: &Field2D) -> Result<[f64; 3]> {
    let lv = ops.laplacian(v);
    let lw = ops.laplacian(w);
    let l2v = ops.laplacian(&lv);
    let l3v = ops.laplacian(&l2v);
    let rel = |a: f64, b: f64, scale: f64| {
        if scale == 0.0 {
            (a - b).abs()
        } else {
            (a - b).abs() / scale
        }
    };
    let g1 = ops.grad_inner(v, w)?;
    let s1 = (ops.gradient_norm_sq(v) * ops.gradient_norm_sq(w)).sqrt();
    let g2 = ops.inner(&lv, &lw)?;
    let s2 = ops.norm_l2(&lv) * ops.norm_l2(&lw);
    let g3 = -ops.grad_inner(&lv, &lw)?;
    let s3 = (ops.gradient_norm_sq(&lv) * ops.gradient_norm_sq(&lw)).sqrt();
    Ok([
        rel(ops.inner(&lv.scale(-1.0), w)?, g1, s1),
        rel(ops.inner(&l2v, w)?, g2, s2),
        rel(ops.inner(&l3v, w)?, g3, s3),
    ])
}

/// `(1/3)‖(1+Δ)v‖² + (3/2)‖v‖²₋₁ − ‖v‖²` for mean-zero `v`.
pub fn embedding_slack(ops: &SpectralOps, v: &Field2D) -> Result<f64> {
    let hm1 = ops.norm_hm1_sq(v)?;
    let lin = ops.one_plus_lap(v);
    Ok(dot(&lin, &lin) / 3.0 + 1.5 * hm1 - dot(v, v))
}

/// `‖∇v‖·‖v‖₋₁ − ‖v‖²` for mean-zero `v`.
pub fn holder_slack(ops: &SpectralOps, v: &Field2D) -> Result<f64> {
    let hm1 = ops.norm_hm1_sq(v)?;
    Ok((ops.gradient_norm_sq(v) * hm1).sqrt() - dot(v, v))
}

/// Slack `RHS − LHS` of the field-level convolution inequality
///
/// ```text
/// Σ_{ℓ,j≤ℓ} θ_{ℓ−j}⟨Δv^j, Δv^ℓ⟩ ≤ ε Σ_{ℓ,j≤ℓ} θ_{ℓ−j}⟨∇Δv^j, ∇Δv^ℓ⟩ + 8m₂²/(m₁⁵ε²) Σ_ℓ ‖v^ℓ‖²
/// ```
///
/// with `theta` the DOC kernels and `fields` the sequence `v^k..v^n`.
pub fn doc_field_inequality_slack(
    ops: &SpectralOps,
    theta: &[f64],
    fields: &[Field2D],
    eps: f64,
    m1: f64,
    m2: f64,
) -> Result<f64> {
    if theta.len() < fields.len() {
        return Err(Error::InvalidArgument(format!(
            "{} DOC kernels for a sequence of {} fields",
            theta.len(),
            fields.len()
        )));
    }
    for f in fields {
        ops.check(f)?;
    }
    let spectra: Vec<Spectrum2D> = fields.iter().map(|f| ops.forward(f)).collect();
    let (mut lhs, mut high) = (0.0, 0.0);
    for l in 0..spectra.len() {
        for j in 0..=l {
            let t = theta[l - j];
            lhs += t * ops.parseval(&spectra[j], &spectra[l], |k2| k2 * k2);
            high += t * ops.parseval(&spectra[j], &spectra[l], |k2| k2 * k2 * k2);
        }
    }
    let mass: f64 = fields.iter().map(|f| dot(f, f)).sum();
    Ok(eps * high + 8.0 * m2 * m2 / (m1.powi(5) * eps * eps) * mass - lhs)
}

/// Neumaier summation; a plain running sum of 10⁴–10⁵ values of size one
/// loses about 1e-12 per value, which swamps volume-conservation checks.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Trapezoidal `⟨f, g⟩` without grid checks.
pub(crate) fn dot(f: &Field2D, g: &Field2D) -> f64 {
    f.grid.cell_area()
        * f.values
            .iter()
            .zip(&g.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid8(n: usize) -> Grid2D {
        Grid2D::square(n, 8.0).unwrap()
    }

    fn close(a: &Field2D, b: &Field2D, tol: f64) {
        let d = a.max_abs_diff(b);
        assert!(d <= tol, "max difference {d:e} > {tol:e}");
    }

    #[test]
    fn grid_validation() {
        assert!(Grid2D::new(3, 4, 1.0, 1.0).is_err());
        assert!(Grid2D::new(2, 4, 1.0, 1.0).is_err());
        assert!(Grid2D::new(4, 4, 0.0, 1.0).is_err());
        let g = Grid2D::new(8, 6, 2.0, 3.0).unwrap();
        assert_eq!(Grid2D::signed_mode(4, 8), -4);
        assert_eq!(Grid2D::signed_mode(3, 8), 3);
        assert!((g.kx(1) - PI).abs() < 1e-15);
    }

    #[test]
    fn laplacian_eigenfunctions() {
        let g = grid8(32);
        let ops = SpectralOps::new(g);
        let f = Field2D::from_fn(g, |x, _| (PI * x / 2.0).sin());
        close(&ops.laplacian(&f), &f.scale(-(PI / 2.0).powi(2)), 1e-12);
        close(
            &ops.laplacian(&Field2D::constant(g, 3.0)),
            &Field2D::zeros(g),
            1e-12,
        );
        let f2 = Field2D::from_fn(g, |x, y| (PI * x / 2.0).sin() * (PI * y / 2.0).sin());
        close(&ops.laplacian(&f2), &f2.scale(-PI * PI / 2.0), 1e-12);
    }

    #[test]
    fn one_plus_lap_sq_examples() {
        let g = grid8(32);
        let ops = SpectralOps::new(g);
        close(
            &ops.one_plus_lap_sq(&Field2D::constant(g, 2.5)),
            &Field2D::constant(g, 2.5),
            1e-13,
        );
        let f = Field2D::from_fn(g, |x, _| (PI * x / 2.0).sin());
        let m = (1.0 - PI * PI / 4.0).powi(2);
        close(&ops.one_plus_lap_sq(&f), &f.scale(m), 1e-11);
        // |κ|² = 1 on (0, 2π)² with κ = (1, 0).
        let g1 = Grid2D::square(16, TAU).unwrap();
        let ops1 = SpectralOps::new(g1);
        let f1 = Field2D::from_fn(g1, |x, _| x.cos());
        close(&ops1.one_plus_lap_sq(&f1), &Field2D::zeros(g1), 1e-12);
    }

    #[test]
    fn inverse_negative_laplacian() {
        let g = grid8(32);
        let ops = SpectralOps::new(g);
        let k = PI / 2.0;
        let f = Field2D::from_fn(g, |x, _| (k * x).sin());
        close(
            &ops.inv_neg_laplacian(&f).unwrap(),
            &f.scale(1.0 / (k * k)),
            1e-13,
        );
        assert!(matches!(
            ops.inv_neg_laplacian(&Field2D::constant(g, 1.0)),
            Err(Error::NotMeanZero { .. })
        ));
        assert_eq!(
            ops.inv_neg_laplacian(&Field2D::zeros(g)).unwrap(),
            Field2D::zeros(g)
        );
    }

    #[test]
    fn norms_and_inner_products() {
        let g = grid8(32);
        let ops = SpectralOps::new(g);
        let one = Field2D::constant(g, 1.0);
        assert!((ops.inner(&one, &one).unwrap() - 64.0).abs() < 1e-12);
        let s = Field2D::from_fn(g, |x, _| (PI * x / 2.0).sin());
        assert!((ops.norm_l2(&s) - 32f64.sqrt()).abs() < 1e-12);
        let ss = Field2D::from_fn(g, |x, y| (PI * x / 2.0).sin() * (PI * y / 2.0).sin());
        let k2 = PI * PI / 2.0;
        assert!((ops.norm_hm1(&ss).unwrap() - ops.norm_l2(&ss) / k2.sqrt()).abs() < 1e-12);
        assert!(ops.gradient_norm_sq(&one).abs() < 1e-20);
        let kk = PI * PI / 4.0;
        assert!((ops.gradient_norm_sq(&s) - kk * 32.0).abs() < 1e-10);
        let other = Field2D::zeros(grid8(16));
        assert!(matches!(
            ops.inner(&one, &other),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn round_trip() {
        let g = Grid2D::new(16, 12, 3.0, 5.0).unwrap();
        let ops = SpectralOps::new(g);
        let f = Field2D::from_fn(g, |x, y| (x * 1.3).sin() + (y * y).cos() + 0.25 * x * y);
        let back = ops.inverse(&ops.forward(&f));
        assert!(back.max_abs_diff(&f) <= 1e-12 * f.max_abs());
    }

    #[test]
    fn dealias_removes_high_modes() {
        let g = Grid2D::square(12, TAU).unwrap();
        let ops = SpectralOps::new(g);
        let low = Field2D::from_fn(g, |x, y| (2.0 * x).cos() + (4.0 * y).sin());
        let high = Field2D::from_fn(g, |x, _| (5.0 * x).cos());
        let mut s = ops.forward(&low.add(&high));
        ops.dealias(&mut s);
        assert!(ops.inverse(&s).max_abs_diff(&low) < 1e-13);
    }
}
