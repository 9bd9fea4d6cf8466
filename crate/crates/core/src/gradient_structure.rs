//! Discrete gradient structures of the BDF-3, BDF-4 and BDF-5 formulas.
//!
//! For `n >= k` the quadratic quantity `v_n Σ_{j=1}^{n} b_{n−j} v_j` splits as
//!
//! ```text
//! G_k[v⃗_n] − G_k[v⃗_{n−1}] + (σ_Lk/2) v_n² + R_k[v⃗_n]
//! ```
//!
//! with `G_k`, `R_k` nonnegative quadratic functionals of the window
//! `v⃗_n = (v_n, v_{n−1}, …)`. Both are stored as weighted squares of linear
//! stencils over that window, with exact rational coefficients, so the
//! decomposition can be expanded and compared term by term.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::kernels::bdf_kernels;
use crate::matrix_analysis::{symmetric_eigs, BandedLowerToeplitz};

/// Rational type wide enough for the products that appear when the squares are
/// expanded.
pub type Q = Ratio<i128>;

fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

/// Linear stencil over a window, indexed by lag (`0` is `v_n`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stencil(pub Vec<Q>);

impl Stencil {
    /// `v_{n−lag}`.
    pub fn level(lag: usize) -> Self {
        let mut c = vec![Q::zero(); lag + 1];
        c[lag] = q(1, 1);
        Stencil(c)
    }

    /// `δ_1^m v_{n−lag}`, the m-th backward difference.
    pub fn difference(m: usize, lag: usize) -> Self {
        let mut c = vec![Q::zero(); lag + m + 1];
        let mut binom: i128 = 1;
        for i in 0..=m {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            c[lag + i] = Q::from_integer(sign * binom);
            binom = binom * (m - i) as i128 / (i as i128 + 1);
        }
        Stencil(c)
    }

    pub fn scaled(&self, s: Q) -> Self {
        Stencil(self.0.iter().map(|c| c * s).collect())
    }

    pub fn plus(&self, other: &Stencil) -> Self {
        let len = self.0.len().max(other.0.len());
        let mut c = vec![Q::zero(); len];
        for (i, v) in self.0.iter().enumerate() {
            c[i] += v;
        }
        for (i, v) in other.0.iter().enumerate() {
            c[i] += v;
        }
        Stencil(c)
    }

    /// Highest lag with a nonzero coefficient.
    pub fn depth(&self) -> usize {
        self.0.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(q_to_f64).collect()
    }
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()
}

/// One weighted square `w (s · window)²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareTerm {
    pub weight: Q,
    pub stencil: Stencil,
}

impl SquareTerm {
    fn new(weight: Q, stencil: Stencil) -> Self {
        SquareTerm { weight, stencil }
    }
}

/// A quadratic functional written as a sum of weighted squares.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadForm {
    pub terms: Vec<SquareTerm>,
}

impl QuadForm {
    pub fn depth(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.stencil.depth())
            .max()
            .unwrap_or(0)
    }

    /// Symmetric coefficient matrix of size `size × size` (lag-indexed).
    pub fn expand(&self, size: usize) -> Vec<Vec<Q>> {
        let mut m = vec![vec![Q::zero(); size]; size];
        for t in &self.terms {
            let c = &t.stencil.0;
            for (a, ca) in c.iter().enumerate() {
                for (b, cb) in c.iter().enumerate() {
                    m[a][b] += t.weight * ca * cb;
                }
            }
        }
        m
    }

    /// Exact evaluation on a rational window.
    pub fn eval_exact(&self, window: &[Q]) -> Q {
        self.terms
            .iter()
            .map(|t| {
                let s: Q = t
                    .stencil
                    .0
                    .iter()
                    .zip(window)
                    .map(|(c, v)| c * v)
                    .fold(Q::zero(), |a, b| a + b);
                t.weight * s * s
            })
            .fold(Q::zero(), |a, b| a + b)
    }

    fn eval_unchecked(&self, window: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let s: f64 = t
                    .stencil
                    .0
                    .iter()
                    .zip(window)
                    .map(|(c, v)| q_to_f64(c) * v)
                    .sum();
                q_to_f64(&t.weight) * s * s
            })
            .sum()
    }

    pub fn weights_positive(&self) -> bool {
        self.terms.iter().all(|t| t.weight > Q::zero())
    }
}

/// `σ_Lk` together with `G_k` and `R_k` for one order.
#[derive(Clone, Debug)]
pub struct GradientStructure {
    pub k: usize,
    pub sigma_l: Q,
    /// `G_k` as a sum of squares with positive weights.
    pub g: QuadForm,
    /// `G_k` in its difference-operator coefficient form (weights of either
    /// sign); equal to `g` as a quadratic form.
    pub g_coefficient_form: QuadForm,
    pub r: QuadForm,
}

impl GradientStructure {
    /// Maximum lag referenced by either functional.
    pub fn window_depth(&self) -> usize {
        self.g.depth().max(self.r.depth())
    }

    pub fn sigma_f64(&self) -> f64 {
        q_to_f64(&self.sigma_l)
    }

    fn check_window(&self, window: &[f64]) -> Result<()> {
        let needed = self.window_depth() + 1;
        if window.len() < needed {
            return Err(Error::ShortWindow {
                got: window.len(),
                needed,
            });
        }
        Ok(())
    }

    /// `G_k` on a window given newest first.
    pub fn eval_g(&self, window: &[f64]) -> Result<f64> {
        self.check_window(window)?;
        Ok(self.g.eval_unchecked(window))
    }

    /// `R_k` on a window given newest first.
    pub fn eval_r(&self, window: &[f64]) -> Result<f64> {
        self.check_window(window)?;
        Ok(self.r.eval_unchecked(window))
    }
}

/// The window `(v_n, v_{n−1}, …)` of length `len`, zero-padded past `v_0`.
pub fn window_at(v: &[f64], n: usize, len: usize) -> Vec<f64> {
    (0..len)
        .map(|lag| if lag <= n { v[n - lag] } else { 0.0 })
        .collect()
}

fn lvl(lag: usize) -> Stencil {
    Stencil::level(lag)
}

fn dif(m: usize, lag: usize) -> Stencil {
    Stencil::difference(m, lag)
}

/// Gradient structure for `k ∈ {3, 4, 5}`.
pub fn structure(k: usize) -> Result<GradientStructure> {
    let sq = SquareTerm::new;
    let s = match k {
        3 => GradientStructure {
            k,
            sigma_l: q(95, 48),
            g: QuadForm {
                terms: vec![
                    sq(q(1, 6), lvl(0)),
                    sq(
                        q(1, 6),
                        lvl(0).scaled(q(7, 4)).plus(&lvl(1).scaled(q(-1, 1))),
                    ),
                ],
            },
            g_coefficient_form: QuadForm {
                terms: vec![
                    sq(q(37, 96), lvl(0)),
                    sq(q(-1, 8), lvl(1)),
                    sq(q(7, 24), dif(1, 0)),
                ],
            },
            r: QuadForm {
                terms: vec![sq(q(1, 6), dif(2, 0).plus(&lvl(1).scaled(q(1, 4))))],
            },
        },
        4 => GradientStructure {
            k,
            sigma_l: q(4919, 3072),
            g: QuadForm {
                terms: vec![
                    sq(q(13627, 43008), lvl(0)),
                    sq(
                        q(7, 24),
                        lvl(0).scaled(q(65, 56)).plus(&lvl(1).scaled(q(-1, 1))),
                    ),
                    sq(q(1, 8), dif(1, 0).scaled(q(3, 2)).plus(&lvl(2))),
                ],
            },
            g_coefficient_form: QuadForm {
                terms: vec![
                    sq(q(3433, 6144), lvl(0)),
                    sq(q(-15, 64), lvl(1)),
                    sq(q(1, 8), lvl(2)),
                    sq(q(47, 192), dif(1, 0)),
                    sq(q(-3, 16), dif(1, 1)),
                    sq(q(3, 16), dif(2, 0)),
                ],
            },
            r: QuadForm {
                terms: vec![
                    sq(q(1, 8), dif(3, 0).plus(&dif(1, 1).scaled(q(3, 2)))),
                    sq(q(1, 6), dif(2, 0).plus(&lvl(1).scaled(q(35, 32)))),
                ],
            },
        },
        5 => GradientStructure {
            k,
            sigma_l: q(646631, 1920000),
            g: QuadForm {
                terms: vec![
                    sq(q(1198850903, 1678080000), lvl(0)),
                    sq(
                        q(437, 900),
                        lvl(0).scaled(q(4931, 6992)).plus(&lvl(1).scaled(q(-1, 1))),
                    ),
                    sq(q(9, 40), dif(1, 0).scaled(q(23, 18)).plus(&lvl(2))),
                    sq(
                        q(1, 10),
                        dif(1, 0)
                            .scaled(q(2, 1))
                            .plus(&lvl(2).scaled(q(2, 1)))
                            .plus(&lvl(3).scaled(q(-1, 1))),
                    ),
                ],
            },
            g_coefficient_form: QuadForm {
                terms: vec![
                    sq(q(4227769, 3840000), lvl(0)),
                    sq(q(-551, 1600), lvl(1)),
                    sq(q(17, 40), lvl(2)),
                    sq(q(-1, 10), lvl(3)),
                    sq(q(1607, 4800), dif(1, 0)),
                    sq(q(-39, 80), dif(1, 1)),
                    sq(q(2, 5), dif(1, 2)),
                    sq(q(7, 80), dif(2, 0)),
                    sq(q(-2, 5), dif(2, 1)),
                    sq(q(1, 5), dif(3, 0)),
                ],
            },
            r: QuadForm {
                terms: vec![
                    sq(q(1, 10), dif(4, 0).plus(&dif(2, 1).scaled(q(2, 1)))),
                    sq(q(1, 8), dif(3, 0).plus(&dif(1, 1).scaled(q(23, 10)))),
                    sq(q(1, 6), dif(2, 0).plus(&lvl(1).scaled(q(1787, 800)))),
                ],
            },
        },
        _ => {
            return Err(Error::InvalidOrder {
                k,
                expected: "3..=5",
            })
        }
    };
    Ok(s)
}

/// Pieces of the decomposition at one step, in double precision.
#[derive(Clone, Copy, Debug)]
pub struct IdentityTerms {
    pub lhs: f64,
    pub g_now: f64,
    pub g_prev: f64,
    pub sigma_term: f64,
    pub r_now: f64,
}

impl IdentityTerms {
    pub fn residual(&self) -> f64 {
        self.lhs - (self.g_now - self.g_prev + self.sigma_term + self.r_now)
    }

    pub fn scale(&self) -> f64 {
        self.lhs.abs()
            + self.g_now.abs()
            + self.g_prev.abs()
            + self.sigma_term.abs()
            + self.r_now.abs()
    }

    pub fn relative_residual(&self) -> f64 {
        let scale = self.scale();
        if scale == 0.0 {
            0.0
        } else {
            self.residual().abs() / scale
        }
    }
}

/// Both sides of the decomposition at step `n` of the sequence `v`.
pub fn identity_terms(s: &GradientStructure, b: &[f64], v: &[f64], n: usize) -> IdentityTerms {
    let len = s.window_depth() + 1;
    let now = window_at(v, n, len);
    let lhs = v[n]
        * b.iter()
            .enumerate()
            .filter(|(i, _)| *i < n)
            .map(|(i, bi)| bi * v[n - i])
            .sum::<f64>();
    let g_prev = if n == 0 {
        0.0
    } else {
        s.g.eval_unchecked(&window_at(v, n - 1, len))
    };
    IdentityTerms {
        lhs,
        g_now: s.g.eval_unchecked(&now),
        g_prev,
        sigma_term: 0.5 * s.sigma_f64() * v[n] * v[n],
        r_now: s.r.eval_unchecked(&now),
    }
}

/// Largest relative residual of the decomposition over `k <= n <= n_max`.
pub fn verify_identity(k: usize, v: &[f64], n_max: usize) -> Result<f64> {
    if n_max < k {
        return Err(Error::InvalidArgument(format!(
            "horizon {n_max} must be at least k = {k}"
        )));
    }
    if v.len() < n_max + 1 {
        return Err(Error::ShortWindow {
            got: v.len(),
            needed: n_max + 1,
        });
    }
    let s = structure(k)?;
    let b = bdf_kernels(k)?.to_f64();
    Ok((k..=n_max)
        .map(|n| identity_terms(&s, &b, v, n).relative_residual())
        .fold(0.0, f64::max))
}

/// Smallest eigenvalue of `B_k = B_{k,l} + B_{k,l}ᵀ` of order `n − k + 1`,
/// checked against `σ_Lk`.
pub fn quadratic_form_lower_bound(k: usize, n: usize) -> Result<f64> {
    if n < k {
        return Err(Error::InvalidArgument(format!(
            "n = {n} must be at least k = {k}"
        )));
    }
    let s = structure(k)?;
    let lambda_min = bk_lambda_min(k, n - k + 1)?;
    let bound = s.sigma_f64() - 1e-8;
    if lambda_min < bound {
        return Err(Error::BoundViolation {
            quantity: format!("lambda_min(B_{k})"),
            value: lambda_min,
            bound,
        });
    }
    Ok(lambda_min)
}

/// `λ_min(B_k)` for a matrix of order `size`.
pub fn bk_lambda_min(k: usize, size: usize) -> Result<f64> {
    let lower = BandedLowerToeplitz::bdf(k, size)?;
    Ok(symmetric_eigs(&lower.symmetrized())?.0)
}

/// Smallest order `<= max_size` at which `λ_min(B_k) < threshold`.
///
/// `B_k` of order m is the leading principal submatrix of `B_k` of order
/// m + 1, so by interlacing `λ_min` is non-increasing in the order and the
/// first crossing can be bisected.
pub fn first_order_below(
    k: usize,
    threshold: f64,
    max_size: usize,
) -> Result<Option<(usize, f64)>> {
    if max_size == 0 {
        return Ok(None);
    }
    let at_max = bk_lambda_min(k, max_size)?;
    if at_max >= threshold {
        return Ok(None);
    }
    let (mut lo, mut hi, mut hi_val) = (0usize, max_size, at_max);
    // Invariant: order `lo` is not below threshold (order 0 trivially), `hi` is.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let val = bk_lambda_min(k, mid)?;
        if val < threshold {
            hi = mid;
            hi_val = val;
        } else {
            lo = mid;
        }
    }
    Ok(Some((hi, hi_val)))
}

/// First order at which the BDF-6 quadratic form becomes indefinite.
pub fn bdf6_counterexample(n_max: usize) -> Result<(usize, f64)> {
    if n_max < 6 {
        return Err(Error::InvalidArgument(format!(
            "search limit {n_max} must be at least 6"
        )));
    }
    first_order_below(6, 0.0, n_max)?.ok_or(Error::NoNegativeEigenvalue {
        k: 6,
        max_size: n_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_values() {
        assert!((structure(3).unwrap().sigma_f64() - 1.979).abs() < 1e-3);
        assert!((structure(4).unwrap().sigma_f64() - 1.601).abs() < 1e-3);
        assert!((structure(5).unwrap().sigma_f64() - 0.3367).abs() < 1e-4);
        assert!(structure(6).is_err());
        assert!(structure(2).is_err());
    }

    #[test]
    fn sums_of_squares_have_positive_weights() {
        for k in 3..=5 {
            let s = structure(k).unwrap();
            assert!(s.g.weights_positive());
            assert!(s.r.weights_positive());
            assert_eq!(s.window_depth(), k - 1);
            assert_eq!(s.g.depth(), k - 2);
        }
    }

    #[test]
    fn difference_stencils() {
        assert_eq!(
            Stencil::difference(2, 1).to_f64(),
            vec![0.0, 1.0, -2.0, 1.0]
        );
        assert_eq!(
            Stencil::difference(4, 0).to_f64(),
            vec![1.0, -4.0, 6.0, -4.0, 1.0]
        );
    }

    #[test]
    fn eval_examples() {
        let s3 = structure(3).unwrap();
        assert_eq!(s3.eval_g(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!((s3.eval_g(&[1.0, 0.0, 0.0]).unwrap() - 65.0 / 96.0).abs() < 1e-15);
        assert!((s3.eval_r(&[1.0, 0.0, 0.0]).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(s3.eval_r(&[0.0; 3]).unwrap(), 0.0);

        let s4 = structure(4).unwrap();
        let g = s4.eval_g(&[1.0; 4]).unwrap();
        assert!((g - (3433.0 / 6144.0 - 15.0 / 64.0 + 1.0 / 8.0)).abs() < 1e-14);

        let s5 = structure(5).unwrap();
        let r = s5.eval_r(&[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((r - 47.0 / 120.0).abs() < 1e-14);
    }

    #[test]
    fn short_window_is_an_error() {
        let s5 = structure(5).unwrap();
        assert!(matches!(
            s5.eval_g(&[1.0, 2.0]),
            Err(Error::ShortWindow { got: 2, needed: 5 })
        ));
        assert!(s5.eval_r(&[1.0; 4]).is_err());
    }

    #[test]
    fn window_padding() {
        let v = [1.0, 2.0, 3.0];
        assert_eq!(window_at(&v, 2, 5), vec![3.0, 2.0, 1.0, 0.0, 0.0]);
        assert_eq!(window_at(&v, 0, 2), vec![1.0, 0.0]);
    }

    #[test]
    fn identity_trivial_sequences() {
        for k in 3..=5 {
            assert_eq!(verify_identity(k, &[0.0; 20], 19).unwrap(), 0.0);
            assert!(verify_identity(k, &[1.0; 30], 29).unwrap() <= 1e-13);
        }
        assert!(verify_identity(3, &[0.0; 5], 2).is_err());
        assert!(verify_identity(3, &[0.0; 5], 10).is_err());
    }

    #[test]
    fn lower_bound_small_and_counterexample() {
        let one = quadratic_form_lower_bound(3, 3).unwrap();
        assert!((one - 11.0 / 3.0).abs() < 1e-12);
        let (size, lmin) = bdf6_counterexample(200).unwrap();
        assert!(size <= 100);
        assert!(lmin < -1e-6);
        // Order size − 1 is still positive semi-definite.
        assert!(bk_lambda_min(6, size - 1).unwrap() >= 0.0);
        assert!(bdf6_counterexample(3).is_err());
    }
}
