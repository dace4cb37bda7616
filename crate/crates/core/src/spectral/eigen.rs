use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Above this size the leading pair is found by power iteration.
pub const FULL_DECOMPOSITION_LIMIT: usize = 512;
pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: DVector<f64>,
}

/// Eigenpair of largest |eigenvalue| of a symmetric matrix.
pub fn leading_eigenpair(matrix: &DMatrix<f64>) -> Result<EigenPair> {
    if matrix.nrows() <= FULL_DECOMPOSITION_LIMIT {
        Ok(full_leading_eigenpair(matrix))
    } else {
        power_iteration(matrix, POWER_TOL, POWER_MAX_ITER)
    }
}

/// Leading pair from a complete symmetric eigendecomposition.
pub fn full_leading_eigenpair(matrix: &DMatrix<f64>) -> EigenPair {
    let eig = SymmetricEigen::new(matrix.clone());
    let mut best = 0;
    for (k, v) in eig.eigenvalues.iter().enumerate() {
        if v.abs() > eig.eigenvalues[best].abs() {
            best = k;
        }
    }
    let vector = eig.eigenvectors.column(best).into_owned();
    let norm = vector.norm();
    EigenPair {
        value: eig.eigenvalues[best],
        vector: vector / norm,
    }
}

/// Power iteration from a fixed pseudo-random start vector.
///
/// Converges when successive iterates agree up to sign within `tol`.
/// Spectra whose two largest magnitudes coincide do not converge.
pub fn power_iteration(matrix: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<EigenPair> {
    let m = matrix.nrows();
    let mut v = DVector::from_fn(m, |i, _| {
        // Weyl sequence; avoids starting orthogonal to structured eigenvectors.
        let x = ((i as f64 + 1.0) * 0.618_033_988_749_894_9).fract();
        0.5 + x
    });
    v /= v.norm();
    for _ in 0..max_iter {
        let w = matrix * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(EigenPair { value: 0.0, vector: v });
        }
        let w = w / norm;
        let change = (&w - &v).norm().min((&w + &v).norm());
        v = w;
        if change < tol {
            let value = v.dot(&(matrix * &v));
            return Ok(EigenPair { value, vector: v });
        }
    }
    Err(Error::NonConvergence(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &DMatrix<f64>, p: &EigenPair) -> f64 {
        (a * &p.vector - &p.vector * p.value).norm()
    }

    #[test]
    fn explicit_rank_one() {
        let v = DVector::from_row_slice(&[1.0, 0.0, 0.0]);
        let a = &v * v.transpose() * 3.0;
        let p = leading_eigenpair(&a).unwrap();
        assert!((p.value - 3.0).abs() < 1e-14);
        assert!((p.vector[0].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn negative_dominant_eigenvalue() {
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(&[2.0, -5.0]));
        let p = leading_eigenpair(&a).unwrap();
        assert_eq!(p.value, -5.0);
        assert!(p.vector[0].abs() < 1e-14);
        assert!((p.vector[1].abs() - 1.0).abs() < 1e-14);
        let p = power_iteration(&a, 1e-12, 10_000).unwrap();
        assert!((p.value + 5.0).abs() < 1e-10);
    }

    #[test]
    fn random_symmetric_residual() {
        // Fixed pseudo-random symmetric 6x6.
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut a = DMatrix::zeros(6, 6);
        for i in 0..6 {
            for j in i..6 {
                let x = next();
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        let p = leading_eigenpair(&a).unwrap();
        assert!(residual(&a, &p) <= 1e-10);
        assert!((p.vector.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_matches_full_decomposition() {
        let u = DVector::from_fn(40, |i, _| (i as f64 * 0.3).sin() + 0.2);
        let a = &u * u.transpose() + DMatrix::identity(40, 40) * 0.5;
        let full = full_leading_eigenpair(&a);
        let power = power_iteration(&a, 1e-12, 10_000).unwrap();
        assert!((full.value - power.value).abs() < 1e-9);
        assert!(full.vector.dot(&power.vector).abs() > 1.0 - 1e-10);
    }

    #[test]
    fn degenerate_magnitudes_do_not_converge() {
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, -1.0]));
        assert_eq!(power_iteration(&a, 1e-12, 200), Err(Error::NonConvergence(200)));
    }
}
