//! Toeplitz matrices built from the BDF-k and DOC-k kernels, extremal
//! eigenvalues, and the scalar Young-type convolution inequalities.

use crate::error::{Error, Result};
use crate::harness::rng::SplitMix64;
use crate::kernels::{bdf_kernels, doc_kernels, rho};

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_fn(self.n, |i, j| a * self[(i, j)])
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[l * n..(l + 1) * n];
                for (o, b) in out.data[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn max_asymmetry(&self) -> (usize, usize, f64) {
        let mut worst = (0, 0, 0.0);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = (self[(i, j)] - self[(j, i)]).abs();
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SymMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower-triangular banded Toeplitz matrix with first column `band`
/// (zero below the band).
#[derive(Clone, Debug, PartialEq)]
pub struct BandedLowerToeplitz {
    size: usize,
    band: Vec<f64>,
}

impl BandedLowerToeplitz {
    pub fn new(size: usize, band: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument(
                "matrix order must be at least 1".into(),
            ));
        }
        Ok(BandedLowerToeplitz { size, band })
    }

    /// `B_{k,l}` of order `m`.
    pub fn bdf(k: usize, m: usize) -> Result<Self> {
        Self::new(m, bdf_kernels(k)?.to_f64())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn band(&self) -> &[f64] {
        &self.band
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i >= j && i - j < self.band.len() {
            self.band[i - j]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> SymMatrix {
        SymMatrix::from_fn(self.size, |i, j| self.entry(i, j))
    }

    /// `L + Lᵀ`.
    pub fn symmetrized(&self) -> SymMatrix {
        SymMatrix::from_fn(self.size, |i, j| self.entry(i, j) + self.entry(j, i))
    }

    /// `Lᵀ L`, banded with at most `2·band − 1` diagonals.
    pub fn gram(&self) -> SymMatrix {
        let w = self.band.len();
        SymMatrix::from_fn(self.size, |i, j| {
            let lo = i.max(j);
            let hi = (i.min(j) + w).min(self.size);
            (lo..hi).map(|r| self.entry(r, i) * self.entry(r, j)).sum()
        })
    }
}

/// `Θ_{k,l}`: dense lower-triangular Toeplitz matrix of DOC kernels.
pub fn build_theta_lower(k: usize, m: usize) -> Result<SymMatrix> {
    let theta = doc_kernels(k, m)?;
    let t = theta.values();
    Ok(SymMatrix::from_fn(
        m,
        |i, j| if i >= j { t[i - j] } else { 0.0 },
    ))
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(matrix: &SymMatrix) -> Result<Vec<f64>> {
    let (i, j, asym) = matrix.max_asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric {
            i,
            j,
            asymmetry: asym,
        });
    }
    let n = matrix.size();
    // Work on the symmetrised copy so tiny asymmetries do not leak in.
    let mut a = SymMatrix::from_fn(n, |i, j| 0.5 * (matrix[(i, j)] + matrix[(j, i)]));
    let frob = a.frobenius();
    if frob == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let skip = 1e-18 * frob;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= skip {
                    continue;
                }
                rotate(&mut a, p, q);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn rotate(a: &mut SymMatrix, p: usize, q: usize) {
    let n = a.size();
    let apq = a[(p, q)];
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a.data[p * n + r];
        let arq = a.data[q * n + r];
        let new_p = c * arp - s * arq;
        let new_q = s * arp + c * arq;
        a.data[p * n + r] = new_p;
        a.data[q * n + r] = new_q;
        a.data[r * n + p] = new_p;
        a.data[r * n + q] = new_q;
    }
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
}

/// Extremal eigenvalues `(λ_min, λ_max)` of a symmetric matrix.
pub fn symmetric_eigs(matrix: &SymMatrix) -> Result<(f64, f64)> {
    if matrix.size() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let eig = jacobi_eigenvalues(matrix)?;
    Ok((eig[0], eig[eig.len() - 1]))
}

/// Lower bound `m_1k` on `λ_min(B_k)` for every order.
pub fn m1(k: usize) -> Result<f64> {
    match k {
        3 => Ok(95.0 / 48.0),
        4 => Ok(1.628),
        5 => Ok(0.3711),
        _ => Err(Error::InvalidOrder {
            k,
            expected: "3..=5",
        }),
    }
}

/// Gerschgorin bound `m_3k = 7ρ_k / (2(7−k))` on `λ_max(Θ_k)`.
pub fn m3(k: usize) -> Result<f64> {
    Ok(7.0 * rho(k)? / (2.0 * (7.0 - k as f64)))
}

/// `m_2k`, taken as `λ_max(B_{k,l}ᵀ B_{k,l})` at the given order.
pub fn m2(k: usize, m: usize) -> Result<f64> {
    Ok(symmetric_eigs(&BandedLowerToeplitz::bdf(k, m)?.gram())?.1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigReport {
    pub k: usize,
    pub m: usize,
    pub lambda_min_bk: f64,
    pub lambda_max_btb: f64,
    pub lambda_min_theta: f64,
    pub lambda_max_theta: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

impl EigReport {
    pub const CSV_HEADER: &'static str = "k,m,lmin_B,lmax_BtB,lmin_T,lmax_T,m1,m2,m3";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.k,
            self.m,
            self.lambda_min_bk,
            self.lambda_max_btb,
            self.lambda_min_theta,
            self.lambda_max_theta,
            self.m1,
            self.m2,
            self.m3
        )
    }
}

impl std::fmt::Display for EigReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "k = {}, m = {}", self.k, self.m)?;
        writeln!(
            f,
            "  lambda_min(B_k)        {:>22.15e}   >= m1 = {:.6}",
            self.lambda_min_bk, self.m1
        )?;
        writeln!(
            f,
            "  lambda_max(B_l^T B_l)  {:>22.15e}   =: m2",
            self.lambda_max_btb
        )?;
        writeln!(
            f,
            "  lambda_min(Theta_k)    {:>22.15e}   >= m1/m2 = {:.6}",
            self.lambda_min_theta,
            self.m1 / self.m2
        )?;
        write!(
            f,
            "  lambda_max(Theta_k)    {:>22.15e}   <= m3 = {:.6}",
            self.lambda_max_theta, self.m3
        )
    }
}

/// Extremal eigenvalues of `B_k`, `B_{k,l}ᵀB_{k,l}` and `Θ_k` at order `m`,
/// checked against `m_1k`, `m_2k` and `m_3k`.
pub fn eig_report(k: usize, m: usize) -> Result<EigReport> {
    let m1 = m1(k)?;
    let m3 = m3(k)?;
    let lower = BandedLowerToeplitz::bdf(k, m)?;
    let (lambda_min_bk, _) = symmetric_eigs(&lower.symmetrized())?;
    let (_, lambda_max_btb) = symmetric_eigs(&lower.gram())?;
    let theta_l = build_theta_lower(k, m)?;
    let (lambda_min_theta, lambda_max_theta) = symmetric_eigs(&theta_l.add(&theta_l.transpose()))?;
    let report = EigReport {
        k,
        m,
        lambda_min_bk,
        lambda_max_btb,
        lambda_min_theta,
        lambda_max_theta,
        m1,
        m2: lambda_max_btb,
        m3,
    };
    if lambda_min_bk < m1 - 1e-8 {
        return Err(Error::BoundViolation {
            quantity: format!("lambda_min(B_{k})"),
            value: lambda_min_bk,
            bound: m1 - 1e-8,
        });
    }
    if lambda_max_theta > m3 {
        return Err(Error::BoundViolation {
            quantity: format!("lambda_max(Theta_{k})"),
            value: lambda_max_theta,
            bound: m3,
        });
    }
    if lambda_min_theta < m1 / report.m2 - 1e-8 {
        return Err(Error::BoundViolation {
            quantity: format!("lambda_min(Theta_{k})"),
            value: lambda_min_theta,
            bound: m1 / report.m2 - 1e-8,
        });
    }
    Ok(report)
}

/// `Σ_{ℓ=0}^{m−1} Σ_{j=0}^{ℓ} θ_{ℓ−j} v_j w_ℓ`, i.e. `wᵀ Θ_{k,l} v`.
pub fn theta_bilinear(theta: &[f64], v: &[f64], w: &[f64]) -> f64 {
    w.iter()
        .enumerate()
        .map(|(l, wl)| wl * (0..=l).map(|j| theta[l - j] * v[j]).sum::<f64>())
        .sum()
}

/// Constants used by the Young-type inequalities.
#[derive(Clone, Copy, Debug)]
pub struct YoungConstants {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

/// Slack (right minus left) of each link of the two scalar inequality chains
///
/// ```text
/// A ≤ ε Q[v] + Σw²/(2 m1 ε)        ≤ ε Q[v] + m2/(m1² ε) Q[w]
/// A ≤ ε Σv² + m3/(4 m1 ε) Σw²      ≤ ε Σv² + m2 m3/(2 m1² ε) Q[w]
/// ```
///
/// with `A = wᵀΘ_{k,l}v` and `Q[u] = uᵀΘ_{k,l}u`.
pub fn young_slacks(theta: &[f64], v: &[f64], w: &[f64], eps: f64, c: YoungConstants) -> [f64; 4] {
    let a = theta_bilinear(theta, v, w);
    let qv = theta_bilinear(theta, v, v);
    let qw = theta_bilinear(theta, w, w);
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let ww: f64 = w.iter().map(|x| x * x).sum();

    let first_mid = eps * qv + ww / (2.0 * c.m1 * eps);
    let first_right = eps * qv + c.m2 / (c.m1 * c.m1 * eps) * qw;
    let second_mid = eps * vv + c.m3 / (4.0 * c.m1 * eps) * ww;
    let second_right = eps * vv + c.m2 * c.m3 / (2.0 * c.m1 * c.m1 * eps) * qw;
    [
        first_mid - a,
        first_right - first_mid,
        second_mid - a,
        second_right - second_mid,
    ]
}

pub const YOUNG_EPSILONS: [f64; 3] = [0.1, 1.0, 10.0];

/// Worst slack of the scalar Young-type inequalities over `trials` random
/// standard-normal pairs `(v, w)` of length `len`.
pub fn check_young_inequalities(k: usize, trials: usize, len: usize, seed: u64) -> Result<f64> {
    if len < k {
        return Err(Error::InvalidArgument(format!(
            "sequence length {len} must be at least k = {k}"
        )));
    }
    let constants = YoungConstants {
        m1: m1(k)?,
        m2: m2(k, len)?,
        m3: m3(k)?,
    };
    let theta = doc_kernels(k, len)?;
    let mut rng = SplitMix64::new(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let v: Vec<f64> = (0..len).map(|_| rng.standard_normal()).collect();
        let w: Vec<f64> = (0..len).map(|_| rng.standard_normal()).collect();
        for eps in YOUNG_EPSILONS {
            for s in young_slacks(theta.values(), &v, &w, eps, constants) {
                worst = worst.min(s);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bdf3_lower_matrix() {
        let l = BandedLowerToeplitz::bdf(3, 1).unwrap();
        assert_eq!(l.to_dense()[(0, 0)], 11.0 / 6.0);
        let d = BandedLowerToeplitz::bdf(3, 3).unwrap().to_dense();
        let rows = [
            [11.0 / 6.0, 0.0, 0.0],
            [-7.0 / 6.0, 11.0 / 6.0, 0.0],
            [1.0 / 3.0, -7.0 / 6.0, 11.0 / 6.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d[(i, j)], rows[i][j]);
            }
        }
    }

    #[test]
    fn bdf5_bandwidth() {
        let d = BandedLowerToeplitz::bdf(5, 500).unwrap().to_dense();
        for i in 0..500 {
            for j in 0..500 {
                let nonzero = d[(i, j)] != 0.0;
                assert_eq!(nonzero, i >= j && i - j < 5, "({i},{j})");
            }
        }
    }

    #[test]
    fn gram_matches_dense_product() {
        let l = BandedLowerToeplitz::bdf(4, 12).unwrap();
        let dense = l.to_dense();
        let expected = dense.transpose().mul(&dense);
        let g = l.gram();
        for i in 0..12 {
            for j in 0..12 {
                assert!((g[(i, j)] - expected[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn theta_lower_entries() {
        let t = build_theta_lower(3, 2).unwrap();
        assert!((t[(0, 0)] - 6.0 / 11.0).abs() < 1e-15);
        assert!((t[(1, 1)] - 6.0 / 11.0).abs() < 1e-15);
        assert!((t[(1, 0)] - 42.0 / 121.0).abs() < 1e-16);
        assert_eq!(t[(0, 1)], 0.0);
    }

    #[test]
    fn identity_eigs() {
        assert_eq!(
            symmetric_eigs(&SymMatrix::identity(10)).unwrap(),
            (1.0, 1.0)
        );
    }

    #[test]
    fn nonsymmetric_rejected() {
        let l = BandedLowerToeplitz::bdf(3, 4).unwrap().to_dense();
        assert!(matches!(
            symmetric_eigs(&l),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn two_by_two() {
        let m = SymMatrix::from_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
        let (lo, hi) = symmetric_eigs(&m).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
    }

    #[test]
    fn young_zero_data() {
        let theta = doc_kernels(3, 10).unwrap();
        let c = YoungConstants {
            m1: m1(3).unwrap(),
            m2: 11.1,
            m3: m3(3).unwrap(),
        };
        let s = young_slacks(theta.values(), &[0.0; 10], &[0.0; 10], 1.0, c);
        assert_eq!(s, [0.0; 4]);
    }

    #[test]
    fn m3_values() {
        assert!((m3(3).unwrap() - 35.0 / 12.0).abs() < 1e-14);
        assert!((m3(5).unwrap() - 168.0 / 5.0).abs() < 1e-13);
    }
}
