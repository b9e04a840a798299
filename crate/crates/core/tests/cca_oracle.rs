use csa_core::cca::{fit, fit_matrices, project, CsaModel, SRule, Side};
use csa_core::similarity::{score_features, DegeneratePolicy};
use csa_core::{FeatureMatrix, Matrix};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).unwrap()
}

/// Paired data with a shared component so correlations are spread out.
fn paired(seed: u64, d1: usize, d2: usize, n: usize) -> (Matrix, Matrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = d1.min(d2);
    let shared = gaussian(&mut rng, k, n);
    let m1 = gaussian(&mut rng, d1, k);
    let m2 = gaussian(&mut rng, d2, k);
    let z1 = m1.matmul(&shared).unwrap().add(&gaussian(&mut rng, d1, n).scale(1.5));
    let z2 = m2.matmul(&shared).unwrap().add(&gaussian(&mut rng, d2, n).scale(1.5));
    (z1, z2)
}

fn centered_na(z: &Matrix) -> DMatrix<f64> {
    let mut m = DMatrix::from_row_slice(z.rows(), z.cols(), z.as_slice());
    for mut row in m.row_iter_mut() {
        let mean = row.mean();
        row.add_scalar_mut(-mean);
    }
    m
}

/// Canonical correlations from `Σ₁₂ Σ₂₂⁻¹ Σ₂₁ a = ρ² Σ₁₁ a`, reduced to a
/// symmetric problem with the Cholesky factor of `Σ₁₁`.
fn oracle_correlations(z1: &Matrix, z2: &Matrix) -> Vec<f64> {
    let (c1, c2) = (centered_na(z1), centered_na(z2));
    let s11 = &c1 * c1.transpose();
    let s22 = &c2 * c2.transpose();
    let s12 = &c1 * c2.transpose();
    let l1 = s11.cholesky().unwrap().l();
    let l1_inv = l1.try_inverse().unwrap();
    let s22_inv = s22.cholesky().unwrap().inverse();
    let k = &l1_inv * &s12 * s22_inv * s12.transpose() * l1_inv.transpose();
    let k = (&k + k.transpose()) * 0.5;
    let mut lambda: Vec<f64> = nalgebra::SymmetricEigen::new(k).eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    lambda.truncate(z1.rows().min(z2.rows()));
    lambda
}

#[test]
fn correlations_match_generalized_eigen_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let d1 = rng.random_range(1..=10);
        let d2 = rng.random_range(1..=10);
        let n = rng.random_range((d1 + d2 + 5)..=200);
        let (z1, z2) = paired(case, d1, d2, n);
        let model = fit_matrices(&z1, &z2, 0.0, SRule::Fixed(1)).unwrap();
        let expected = oracle_correlations(&z1, &z2);
        assert_eq!(model.rho.len(), expected.len());
        for (a, b) in model.rho.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8, "case {case} ({d1}x{d2}, n={n}): {a} vs {b}");
        }
    }
}

fn centered(z: &Matrix) -> Matrix {
    let mut c = z.clone();
    for i in 0..c.rows() {
        let mean = c.row(i).iter().sum::<f64>() / c.cols() as f64;
        c.row_mut(i).iter_mut().for_each(|v| *v -= mean);
    }
    c
}

#[test]
fn whitening_and_cross_structure() {
    let (z1, z2) = paired(5, 7, 4, 300);
    let m = fit_matrices(&z1, &z2, 0.0, SRule::Fixed(4)).unwrap();
    let u = m.map_a.matmul(&centered(&z1)).unwrap();
    let v = m.map_b.matmul(&centered(&z2)).unwrap();
    assert!(u.gram().max_abs_diff(&Matrix::identity(4)) < 1e-10);
    assert!(v.gram().max_abs_diff(&Matrix::identity(4)) < 1e-10);
    assert!(u.mul_transpose(&v).max_abs_diff(&Matrix::from_diag(&m.rho)) < 1e-10);
}

#[test]
fn self_pair_is_perfectly_correlated() {
    let (z1, _) = paired(8, 6, 6, 100);
    let m = fit_matrices(&z1, &z1, 0.0, SRule::default()).unwrap();
    assert!(m.rho.iter().all(|&r| r >= 1.0 - 1e-6), "{:?}", m.rho);
    assert_eq!(m.s, 6);
}

fn features(z: &Matrix) -> FeatureMatrix {
    FeatureMatrix::with_index_ids(z.clone())
}

fn scores(model: &CsaModel, z1: &Matrix, z2: &Matrix) -> Matrix {
    score_features(model, &features(z1), &features(z2), DegeneratePolicy::Error).unwrap().scores
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn item_order_does_not_matter(seed in 0u64..10_000, shift in 1usize..50) {
        let (z1, z2) = paired(seed, 5, 3, 60);
        let perm: Vec<usize> = (0..60).map(|j| (j * 7 + shift) % 60).collect();
        let a = fit_matrices(&z1, &z2, 0.0, SRule::Fixed(3)).unwrap();
        let b = fit_matrices(&z1.select_columns(&perm), &z2.select_columns(&perm), 0.0, SRule::Fixed(3)).unwrap();
        for (x, y) in a.rho.iter().zip(&b.rho) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn invertible_rescaling_leaves_scores_unchanged(seed in 0u64..10_000, c in 0.01f64..100.0, d in 0.1f64..10.0) {
        let (z1, z2) = paired(seed, 4, 3, 80);
        let a = fit_matrices(&z1, &z2, 0.0, SRule::Fixed(3)).unwrap();
        // Per-row scaling of modality 1, uniform scaling of modality 2.
        let diag: Vec<f64> = (0..4).map(|i| if i % 2 == 0 { c } else { d }).collect();
        let s1 = Matrix::from_diag(&diag).matmul(&z1).unwrap();
        let s2 = z2.scale(c);
        let b = fit_matrices(&s1, &s2, 0.0, SRule::Fixed(3)).unwrap();
        for (x, y) in a.rho.iter().zip(&b.rho) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let before = scores(&a, &z1, &z2);
        let after = scores(&b, &s1, &s2);
        prop_assert!(before.max_abs_diff(&after) < 1e-8);
    }

    #[test]
    fn correlations_are_sorted_and_bounded(seed in 0u64..10_000, d1 in 1usize..8, d2 in 1usize..8) {
        let (z1, z2) = paired(seed, d1, d2, 40);
        let m = fit_matrices(&z1, &z2, 1e-6, SRule::Fixed(1)).unwrap();
        prop_assert_eq!(m.rho.len(), d1.min(d2));
        prop_assert!(m.rho.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(m.rho.iter().all(|r| (0.0..=1.0).contains(r)));
    }
}

#[test]
fn training_mean_projects_to_origin() {
    let (z1, z2) = paired(3, 5, 5, 50);
    let f1 = features(&z1);
    let f2 = features(&z2);
    let m = fit(&f1, &f2, 0.0, SRule::Fixed(2)).unwrap();
    let mean = FeatureMatrix::from_items(std::slice::from_ref(&m.mean_a), vec!["mean".into()]).unwrap();
    let p = project(&m, Side::First, &mean).unwrap();
    assert!(p.max_abs() < 1e-12);
}
