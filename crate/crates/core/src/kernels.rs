//! BDF-k convolution kernels and their discrete orthogonal convolution kernels.
//!
//! Writing the BDF-k difference quotient as a convolution of the increments
//! `∇v^j = v^j − v^{j−1}`,
//!
//! ```text
//! D_k v^n = (1/τ) Σ_{j=1}^{n} b_{n−j} ∇v^j,
//! ```
//!
//! the kernels `b_0..b_{k−1}` are the Taylor coefficients of
//! `Σ_{ℓ=1}^{k} (1−ζ)^{ℓ−1}/ℓ`. The DOC kernels `θ_j` invert that
//! convolution: `Σ_{ℓ=j}^{n} θ_{n−ℓ} b_{ℓ−j} = δ_{nj}`.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational used for kernel coefficients.
pub type Rational = Ratio<i64>;

pub const MIN_ORDER: usize = 1;
pub const MAX_ORDER: usize = 6;

fn check_order(k: usize) -> Result<()> {
    if (MIN_ORDER..=MAX_ORDER).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidOrder {
            k,
            expected: "1..=6",
        })
    }
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// The BDF-k kernels `b_0..b_{k−1}` as exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BdfKernels {
    k: usize,
    b: Vec<Rational>,
}

impl BdfKernels {
    pub fn order(&self) -> usize {
        self.k
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.b
    }

    /// Leading kernel `b_0`.
    pub fn b0(&self) -> Rational {
        self.b[0]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.b.iter().map(rational_to_f64).collect()
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    // Numerators and denominators here are far below 2^53, so this division
    // is correctly rounded.
    q.numer().to_f64().unwrap() / q.denom().to_f64().unwrap()
}

/// Tabulated BDF-k kernels for `1 <= k <= 6`.
pub fn bdf_kernels(k: usize) -> Result<BdfKernels> {
    check_order(k)?;
    let b = match k {
        1 => vec![r(1, 1)],
        2 => vec![r(3, 2), r(-1, 2)],
        3 => vec![r(11, 6), r(-7, 6), r(1, 3)],
        4 => vec![r(25, 12), r(-23, 12), r(13, 12), r(-1, 4)],
        5 => vec![r(137, 60), r(-163, 60), r(137, 60), r(-21, 20), r(1, 5)],
        6 => vec![
            r(147, 60),
            r(-213, 60),
            r(237, 60),
            r(-163, 60),
            r(62, 60),
            r(-1, 6),
        ],
        _ => unreachable!(),
    };
    Ok(BdfKernels { k, b })
}

/// BDF-k kernels expanded from the generating polynomial
/// `Σ_{ℓ=1}^{k} (1−ζ)^{ℓ−1}/ℓ` with exact binomial coefficients.
pub fn bdf_kernels_from_generating_function(k: usize) -> Result<BdfKernels> {
    check_order(k)?;
    let mut b = vec![Rational::zero(); k];
    for l in 1..=k {
        let inv_l = r(1, l as i64);
        let mut binom: i64 = 1;
        for (i, coeff) in b.iter_mut().enumerate().take(l) {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            *coeff += inv_l * Rational::from_integer(sign * binom);
            binom = binom * (l as i64 - 1 - i as i64) / (i as i64 + 1);
        }
    }
    Ok(BdfKernels { k, b })
}

/// The first `m` DOC kernels `θ_0..θ_{m−1}` of BDF-k, in double precision.
#[derive(Clone, Debug, PartialEq)]
pub struct DocKernels {
    k: usize,
    theta: Vec<f64>,
}

impl DocKernels {
    pub fn order(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.theta
    }

    /// Mutable access, used for fault injection in the verification report.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }
}

/// DOC kernels by the recursion `θ_0 = 1/b_0`,
/// `θ_p = −(1/b_0) Σ_{i=1}^{p} θ_{p−i} b_i`.
pub fn doc_kernels(k: usize, m: usize) -> Result<DocKernels> {
    let kernels = bdf_kernels(k)?;
    if m == 0 {
        return Err(Error::InvalidArgument(
            "DOC kernel length must be at least 1".into(),
        ));
    }
    let b = kernels.to_f64();
    let theta = doc_recursion(&b, m);
    Ok(DocKernels { k, theta })
}

pub(crate) fn doc_recursion(b: &[f64], m: usize) -> Vec<f64> {
    let b0 = b[0];
    let mut theta = Vec::with_capacity(m);
    theta.push(1.0 / b0);
    for p in 1..m {
        let top = p.min(b.len() - 1);
        let s: f64 = (1..=top).map(|i| theta[p - i] * b[i]).sum();
        theta.push(-s / b0);
    }
    theta
}

/// Largest violation of the orthogonality identity
/// `Σ_{ℓ=j}^{n} θ_{n−ℓ} b_{ℓ−j} = δ_{nj}` over `k <= j <= n`.
pub fn verify_orthogonality(k: usize, n: usize) -> Result<f64> {
    if n < k {
        return Err(Error::InvalidArgument(format!(
            "orthogonality horizon n = {n} must be at least k = {k}"
        )));
    }
    let b = bdf_kernels(k)?.to_f64();
    let theta = doc_kernels(k, n - k + 1)?;
    Ok(orthogonality_residual(theta.values(), &b, k, n))
}

/// Residual of the orthogonality identity for arbitrary kernel arrays; `theta`
/// needs at least `n − k + 1` entries.
pub fn orthogonality_residual(theta: &[f64], b: &[f64], k: usize, n: usize) -> f64 {
    let mut worst = 0.0f64;
    for j in k..=n {
        let p = n - j;
        let s: f64 = (0..=p.min(b.len() - 1)).map(|i| theta[p - i] * b[i]).sum();
        let delta = if p == 0 { 1.0 } else { 0.0 };
        worst = worst.max((s - delta).abs());
    }
    worst
}

/// Decay constant `ρ_k` of the DOC kernels.
pub fn rho(k: usize) -> Result<f64> {
    match k {
        3 => Ok(10.0 / 3.0),
        4 => Ok(6.0),
        5 => Ok(96.0 / 5.0),
        _ => Err(Error::InvalidOrder {
            k,
            expected: "3..=5",
        }),
    }
}

/// Upper bound `(ρ_k/4)(k/7)^j` on `|θ_j|`.
pub fn doc_decay_bound(k: usize, j: usize) -> Result<f64> {
    let rho = rho(k)?;
    Ok(rho / 4.0 * (k as f64 / 7.0).powi(j as i32))
}

/// Sum of the kernels; equals one for every order.
pub fn kernel_sum(kernels: &BdfKernels) -> Rational {
    kernels
        .coefficients()
        .iter()
        .fold(Rational::zero(), |acc, b| acc + b)
}
