//! Closed-form population covariance of conditionally independent
//! ensembles, with or without one cartel.

use nalgebra::{DMatrix, DVector};

use crate::model::EnsembleSpec;

/// `rho_i = 2 pi_i - 1` for the honest block and `tau_j = 2 xi_j - 1` for
/// cartel members, in column order.
pub fn signed_accuracies(spec: &EnsembleSpec) -> (Vec<f64>, Vec<f64>) {
    let rho = spec.honest.iter().map(|p| 2.0 * p.pi() - 1.0).collect();
    let tau = spec
        .cartel
        .as_ref()
        .map(|c| c.members.iter().map(|p| 2.0 * p.pi() - 1.0).collect())
        .unwrap_or_default();
    (rho, tau)
}

/// Population covariance matrix. Off-diagonals are
/// `(1-b^2) rho_i rho_j` within the honest block,
/// `(1-b^2) rho_i rho_c tau_j` across blocks and
/// `(1-b^2) tau_i tau_j` inside the cartel; the diagonal is `1 - mu_i^2`.
pub fn population_covariance(spec: &EnsembleSpec) -> DMatrix<f64> {
    let u = 1.0 - spec.class_imbalance * spec.class_imbalance;
    let (rho, tau) = signed_accuracies(spec);
    let rho_c = spec.cartel.as_ref().map_or(0.0, |c| 2.0 * c.pi_c() - 1.0);
    let h = rho.len();
    // Cartel members enter as rho_c tau_j against the honest block.
    let left: Vec<f64> = rho.iter().copied().chain(tau.iter().map(|t| rho_c * t)).collect();
    let right: Vec<f64> = rho.iter().copied().chain(tau.iter().copied()).collect();
    let means = spec.means();
    let m = left.len();
    DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            1.0 - means[i] * means[i]
        } else if i < h && j < h {
            u * rho[i] * rho[j]
        } else if i >= h && j >= h {
            u * right[i] * right[j]
        } else if i < h {
            u * rho[i] * left[j]
        } else {
            u * left[i] * rho[j]
        }
    })
}

/// Leading eigenvalue `lambda = (1-b^2) sum_i (2 pi_i - 1)^2` of the rank-one
/// off-diagonal part for an ensemble without cartel.
pub fn rank_one_lambda(spec: &EnsembleSpec) -> f64 {
    let (rho, _) = signed_accuracies(spec);
    (1.0 - spec.class_imbalance.powi(2)) * rho.iter().map(|r| r * r).sum::<f64>()
}

/// Unit vector proportional to `2 pi_i - 1`; zero if every classifier is random.
pub fn rank_one_vector(spec: &EnsembleSpec) -> DVector<f64> {
    let (rho, _) = signed_accuracies(spec);
    let v = DVector::from_vec(rho);
    let norm = v.norm();
    if norm > 0.0 {
        v / norm
    } else {
        v
    }
}
