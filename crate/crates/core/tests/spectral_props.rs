use std::f64::consts::TAU;

use pfc_core::harness::SplitMix64;
use pfc_core::kernels::doc_kernels;
use pfc_core::matrix_analysis::{m1, m2};
use pfc_core::spectral::{
    doc_field_inequality_slack, embedding_slack, green_residuals, holder_slack,
};
use pfc_core::{Error, Field2D, Grid2D, SpectralOps};
use proptest::prelude::*;

fn random_field(grid: Grid2D, seed: u64, mean_zero: bool) -> Field2D {
    let mut rng = SplitMix64::new(seed);
    let mut f = Field2D::zeros(grid);
    for v in f.values_mut() {
        *v = rng.standard_normal();
    }
    if mean_zero {
        let m = f.mean();
        f = f.map(|v| v - m);
    }
    f
}

/// Laplacian by a direct O(N⁴) discrete Fourier sum.
fn naive_laplacian(f: &Field2D) -> Field2D {
    let g = *f.grid();
    let (nx, ny) = (g.nx, g.ny);
    let mut out = vec![0.0; nx * ny];
    for a in 0..nx {
        for b in 0..ny {
            let kx = TAU / g.lx * Grid2D::signed_mode(a, nx) as f64;
            let ky = TAU / g.ly * Grid2D::signed_mode(b, ny) as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for i in 0..nx {
                for j in 0..ny {
                    let ph =
                        -TAU * (a as f64 * i as f64 / nx as f64 + b as f64 * j as f64 / ny as f64);
                    re += f.at(i, j) * ph.cos();
                    im += f.at(i, j) * ph.sin();
                }
            }
            let mult = -(kx * kx + ky * ky);
            for i in 0..nx {
                for j in 0..ny {
                    let ph =
                        TAU * (a as f64 * i as f64 / nx as f64 + b as f64 * j as f64 / ny as f64);
                    out[i * ny + j] += mult * (re * ph.cos() - im * ph.sin()) / (nx * ny) as f64;
                }
            }
        }
    }
    Field2D::from_values(g, out).unwrap()
}

#[test]
fn laplacian_matches_direct_fourier_sum() {
    let g = Grid2D::new(8, 6, 3.0, 5.0).unwrap();
    let ops = SpectralOps::new(g);
    let f = random_field(g, 3, false);
    let scale = naive_laplacian(&f).max_abs();
    assert!(ops.laplacian(&f).max_abs_diff(&naive_laplacian(&f)) < 1e-12 * scale);
}

#[test]
fn constants_have_no_inverse_laplacian() {
    let g = Grid2D::square(16, 8.0).unwrap();
    let ops = SpectralOps::new(g);
    assert!(matches!(
        ops.inv_neg_laplacian(&Field2D::constant(g, 1.0)),
        Err(Error::NotMeanZero { .. })
    ));
}

/// Direct double sums over the sequence, using only inner products of
/// differentiated fields, as an oracle for the spectral evaluation.
fn field_inequality_sides(ops: &SpectralOps, theta: &[f64], fields: &[Field2D]) -> (f64, f64, f64) {
    let laps: Vec<Field2D> = fields.iter().map(|f| ops.laplacian(f)).collect();
    let (mut lhs, mut high) = (0.0, 0.0);
    for l in 0..fields.len() {
        for j in 0..=l {
            lhs += theta[l - j] * ops.inner(&laps[j], &laps[l]).unwrap();
            high += theta[l - j] * ops.grad_inner(&laps[j], &laps[l]).unwrap();
        }
    }
    let mass = fields.iter().map(|f| ops.inner(f, f).unwrap()).sum();
    (lhs, high, mass)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn green_identities(seed in any::<u64>()) {
        let g = Grid2D::square(32, 8.0).unwrap();
        let ops = SpectralOps::new(g);
        let v = random_field(g, seed, false);
        let w = random_field(g, seed ^ 1, false);
        for r in green_residuals(&ops, &v, &w).unwrap() {
            prop_assert!(r <= 1e-10);
        }
        let direct = ops.inner(&v, &ops.laplacian(&v).scale(-1.0)).unwrap();
        prop_assert!((ops.gradient_norm_sq(&v) - direct).abs() <= 1e-11 * direct);
    }

    #[test]
    fn embedding_and_hoelder(seed in any::<u64>()) {
        let g = Grid2D::square(32, 8.0).unwrap();
        let ops = SpectralOps::new(g);
        let v = random_field(g, seed, true);
        prop_assert!(embedding_slack(&ops, &v).unwrap() >= -1e-10);
        prop_assert!(holder_slack(&ops, &v).unwrap() >= -1e-10);
    }

    #[test]
    fn inverse_pair_and_round_trip(seed in any::<u64>()) {
        let g = Grid2D::new(16, 32, 4.0, 9.0).unwrap();
        let ops = SpectralOps::new(g);
        let v = random_field(g, seed, true);
        let back = ops.laplacian(&ops.inv_neg_laplacian(&v).unwrap());
        prop_assert!(back.max_abs_diff(&v.scale(-1.0)) <= 1e-11 * v.max_abs());
        let rt = ops.inverse(&ops.forward(&v));
        prop_assert!(rt.max_abs_diff(&v) <= 1e-12 * v.max_abs());
    }

    #[test]
    fn field_convolution_inequality(seed in any::<u64>(), k in 3usize..=5, len in 1usize..=40) {
        let g = Grid2D::square(8, 8.0).unwrap();
        let ops = SpectralOps::new(g);
        let fields: Vec<Field2D> = (0..len).map(|i| random_field(g, seed.wrapping_add(i as u64), true)).collect();
        let theta = doc_kernels(k, len).unwrap();
        let (m1k, m2k) = (m1(k).unwrap(), m2(k, len.max(k)).unwrap());
        let (lhs, high, mass) = field_inequality_sides(&ops, theta.values(), &fields);
        for eps in [0.4, 1.0] {
            let oracle = eps * high + 8.0 * m2k * m2k / (m1k.powi(5) * eps * eps) * mass - lhs;
            let slack = doc_field_inequality_slack(&ops, theta.values(), &fields, eps, m1k, m2k).unwrap();
            prop_assert!(slack >= -1e-9);
            prop_assert!((slack - oracle).abs() <= 1e-9 * (oracle.abs() + lhs.abs()));
        }
    }
}
