use nalgebra::DMatrix;
use pfc_core::matrix_analysis::{
    build_theta_lower, check_young_inequalities, jacobi_eigenvalues, m2, symmetric_eigs,
    BandedLowerToeplitz, SymMatrix,
};
use pfc_core::Error;
use proptest::prelude::*;

fn to_na(m: &SymMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.size(), m.size(), |i, j| m[(i, j)])
}

fn sorted_na_eigs(m: &SymMatrix) -> Vec<f64> {
    let mut e: Vec<f64> = to_na(m).symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn jacobi_matches_dense_oracle() {
    for k in 3..=5 {
        let lower = BandedLowerToeplitz::bdf(k, 60).unwrap();
        let theta = build_theta_lower(k, 60).unwrap();
        for m in [
            lower.symmetrized(),
            lower.gram(),
            theta.add(&theta.transpose()),
        ] {
            let ours = jacobi_eigenvalues(&m).unwrap();
            let theirs = sorted_na_eigs(&m);
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a - b).abs() < 1e-9, "k={k}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn theta_inverts_the_bdf_matrix() {
    for k in 3..=5 {
        let l = BandedLowerToeplitz::bdf(k, 300).unwrap().to_dense();
        let t = build_theta_lower(k, 300).unwrap();
        let err = t
            .mul(&l)
            .add(&SymMatrix::identity(300).scaled(-1.0))
            .frobenius();
        assert!(err < 1e-11, "k={k}: {err:e}");
    }
}

#[test]
fn bound_constants_on_moderate_orders() {
    let (l3, _) = symmetric_eigs(&BandedLowerToeplitz::bdf(3, 200).unwrap().symmetrized()).unwrap();
    assert!(l3 >= 95.0 / 48.0 - 1e-8);
    let (l4, _) = symmetric_eigs(&BandedLowerToeplitz::bdf(4, 200).unwrap().symmetrized()).unwrap();
    assert!(l4 >= 1.628 - 1e-6);
}

#[test]
fn asymmetric_input_is_rejected() {
    let mut m = SymMatrix::identity(3);
    m[(0, 2)] = 1e-6;
    assert!(matches!(
        symmetric_eigs(&m),
        Err(Error::NotSymmetric { .. })
    ));
}

/// The computed m₂ settles with the order: order 500 against a dense
/// eigensolve at order 1000.
#[test]
fn m2_is_stable_in_the_order() {
    for k in 3..=5 {
        let at_500 = m2(k, 500).unwrap();
        let gram = BandedLowerToeplitz::bdf(k, 1000).unwrap().gram();
        let at_1000 = to_na(&gram).symmetric_eigenvalues().max();
        assert!(
            (at_500 - at_1000).abs() <= 0.01 * at_1000,
            "k={k}: {at_500} vs {at_1000}"
        );
    }
}

#[test]
fn young_inequalities_on_normal_data() {
    assert!(check_young_inequalities(3, 500, 40, 1).unwrap() >= -1e-10);
    assert!(check_young_inequalities(5, 500, 40, 2).unwrap() >= -1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn doc_matrices_are_positive_definite(k in 3usize..=5, m in 1usize..120) {
        let t = build_theta_lower(k, m).unwrap();
        let (lmin, _) = symmetric_eigs(&t.add(&t.transpose())).unwrap();
        prop_assert!(lmin > 0.0);
    }

    #[test]
    fn banded_entries_follow_the_kernels(k in 3usize..=5, m in 1usize..40, i in 0usize..40, j in 0usize..40) {
        prop_assume!(i < m && j < m);
        let l = BandedLowerToeplitz::bdf(k, m).unwrap();
        let b = pfc_core::kernels::bdf_kernels(k).unwrap().to_f64();
        let want = if i >= j && i - j < k { b[i - j] } else { 0.0 };
        prop_assert_eq!(l.entry(i, j), want);
    }
}
