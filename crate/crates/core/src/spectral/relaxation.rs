//! Trace-regularized PSD fit of the off-diagonal covariances, solved by
//! proximal gradient with eigenvalue soft-thresholding.
//!
//! Minimizes `sum_{i != j} (q_ij - R_ij)^2 + theta * trace(R)` over symmetric
//! PSD `R`. The iteration works on half the objective: a gradient step on
//! `1/2 sum_{i != j} (q_ij - R_ij)^2`, then the prox of `theta/2 * trace`
//! restricted to the PSD cone.

use nalgebra::{DMatrix, SymmetricEigen};

/// Step size; the off-diagonal data term has unit Lipschitz gradient.
const STEP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationOutcome {
    pub r_hat: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Default regularization: one tenth of the mean absolute off-diagonal entry.
pub fn default_theta(q_hat: &DMatrix<f64>) -> f64 {
    let m = q_hat.nrows();
    if m < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                total += q_hat[(i, j)].abs();
            }
        }
    }
    0.1 * total / (m * (m - 1)) as f64
}

/// Eigenvalue soft-threshold by `shrink`, clipping negatives to zero.
fn prox_psd_trace(z: &DMatrix<f64>, shrink: f64) -> DMatrix<f64> {
    let sym = (z + z.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let vals = eig.eigenvalues.map(|l| (l - shrink).max(0.0));
    let v = &eig.eigenvectors;
    let mut out = v * DMatrix::from_diagonal(&vals) * v.transpose();
    out = (&out + out.transpose()) * 0.5;
    out
}

pub fn trace_relaxation(q_hat: &DMatrix<f64>, theta: f64, tol: f64, max_iter: usize) -> RelaxationOutcome {
    let m = q_hat.nrows();
    let mut r = DMatrix::<f64>::zeros(m, m);
    for iter in 1..=max_iter {
        let mut grad = &r - q_hat;
        grad.fill_diagonal(0.0);
        let z = &r - grad * STEP;
        let next = prox_psd_trace(&z, theta * STEP / 2.0);
        let change = (&next - &r).norm();
        r = next;
        if change < tol {
            return RelaxationOutcome {
                r_hat: r,
                iterations: iter,
                converged: true,
            };
        }
    }
    RelaxationOutcome {
        r_hat: r,
        iterations: max_iter,
        converged: false,
    }
}
