use nalgebra::DMatrix;
use proptest::prelude::*;

use topowarn::clustering::pca_project;

/// Eigenvalues of the sample covariance, descending, via nalgebra.
fn reference_eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    let (n, m) = (rows.len(), rows[0].len());
    let x = DMatrix::from_fn(n, m, |i, j| rows[i][j]);
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(n, m, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let mut values: Vec<f64> = cov.symmetric_eigen().eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..6, 3usize..40).prop_flat_map(|(m, n)| {
        proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, m), n)
    })
}

proptest! {
    #[test]
    fn eigenvalues_match_nalgebra(rows in rows_strategy()) {
        prop_assume!(reference_eigenvalues(&rows)[0] > 1e-9);
        let pca = pca_project(&rows, (1, 2)).unwrap();
        let reference = reference_eigenvalues(&rows);
        let scale = reference[0];
        for (a, b) in pca.eigenvalues.iter().zip(&reference) {
            prop_assert!((a - b).abs() <= 1e-9 * scale, "{:?} vs {:?}", pca.eigenvalues, reference);
        }
    }

    #[test]
    fn components_are_orthonormal_eigenvectors(rows in rows_strategy()) {
        prop_assume!(reference_eigenvalues(&rows)[0] > 1e-9);
        let pca = pca_project(&rows, (1, 2)).unwrap();
        let m = rows[0].len();
        for (i, u) in pca.components.iter().enumerate() {
            for (j, v) in pca.components.iter().enumerate() {
                let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-9);
            }
            let lead = u.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            prop_assert!(lead > 0.0);
            prop_assert_eq!(u.len(), m);
        }
        // Projected variance along each kept axis equals its eigenvalue.
        let n = rows.len() as f64;
        for (axis, col) in [(0usize, 0usize), (1, 1)] {
            let var = pca.points.iter().map(|p| p[col] * p[col]).sum::<f64>() / (n - 1.0);
            prop_assert!((var - pca.eigenvalues[axis]).abs() <= 1e-9 * pca.eigenvalues[0]);
        }
    }
}

#[test]
fn isotropic_gaussian_has_flat_spectrum() {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let rows: Vec<Vec<f64>> = (0..4000)
        .map(|_| (0..3).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let pca = pca_project(&rows, (1, 3)).unwrap();
    let reference = reference_eigenvalues(&rows);
    for (a, b) in pca.eigenvalues.iter().zip(&reference) {
        assert!((a - b).abs() < 1e-10);
        assert!((a - 1.0).abs() < 0.1);
    }
}
