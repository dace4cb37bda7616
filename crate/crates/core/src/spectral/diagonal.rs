//! Recovery of the unobserved diagonal of the rank-one matrix from the
//! off-diagonal covariances, via the log-linear system
//! `log|q_ij| = t_i + t_j` over significant pairs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::covariance::CovarianceSummary;
use crate::error::{Error, Result};

/// Pairs below this count mark a diagonal estimate as low-confidence.
pub const LOW_CONFIDENCE_PAIRS: usize = 3;

const RANK_TOL: f64 = 1e-10;

/// What to do with a classifier that has no usable pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DisconnectedPolicy {
    /// Fail with `DisconnectedClassifier`.
    #[default]
    Error,
    /// Drop the classifier from the system and give it a zero diagonal.
    Exclude,
}

/// One equation `log_abs = t_i + t_j` with weight `weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPair {
    pub i: usize,
    pub j: usize,
    pub log_abs: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalFit {
    /// Log square-root of each diagonal entry; `-inf` for excluded classifiers.
    pub t_hat: Vec<f64>,
    /// Unweighted sum of squared residuals over the equations used.
    pub residual: f64,
    pub equations_used: usize,
    /// Number of equations touching each classifier.
    pub pair_counts: Vec<usize>,
    pub excluded: Vec<usize>,
}

impl DiagonalFit {
    /// Diagonal estimates exp(2 t_i).
    pub fn diagonal(&self) -> Vec<f64> {
        self.t_hat.iter().map(|t| (2.0 * t).exp()).collect()
    }

    pub fn low_confidence(&self) -> Vec<usize> {
        (0..self.pair_counts.len())
            .filter(|&i| self.pair_counts[i] < LOW_CONFIDENCE_PAIRS)
            .collect()
    }
}

/// Weighted least squares for `t` over the given equations.
///
/// Solves the normal equations `A t = r` with
/// `A = sum w (e_i + e_j)(e_i + e_j)^T` and `r = sum w y (e_i + e_j)`.
/// Zero-weight equations are ignored.
pub fn solve_log_linear(
    classifiers: usize,
    pairs: &[LogPair],
    policy: DisconnectedPolicy,
) -> Result<DiagonalFit> {
    let used: Vec<&LogPair> = pairs.iter().filter(|p| p.weight > 0.0).collect();
    let mut pair_counts = vec![0usize; classifiers];
    for p in &used {
        pair_counts[p.i] += 1;
        pair_counts[p.j] += 1;
    }
    let excluded: Vec<usize> = (0..classifiers).filter(|&i| pair_counts[i] == 0).collect();
    if let Some(&first) = excluded.first() {
        if policy == DisconnectedPolicy::Error || excluded.len() == classifiers {
            return Err(Error::DisconnectedClassifier(first));
        }
    }

    // Compact index over the classifiers that take part in the system.
    let mut slot = vec![usize::MAX; classifiers];
    let mut n = 0;
    for i in 0..classifiers {
        if pair_counts[i] > 0 {
            slot[i] = n;
            n += 1;
        }
    }
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for p in &used {
        let (i, j) = (slot[p.i], slot[p.j]);
        a[(i, i)] += p.weight;
        a[(j, j)] += p.weight;
        a[(i, j)] += p.weight;
        a[(j, i)] += p.weight;
        rhs[i] += p.weight * p.log_abs;
        rhs[j] += p.weight * p.log_abs;
    }

    let eig = SymmetricEigen::new(a.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
    if !(min > RANK_TOL * max.max(1.0)) {
        return Err(Error::SingularSystem);
    }
    let solution = a.cholesky().ok_or(Error::SingularSystem)?.solve(&rhs);

    let mut t_hat = vec![f64::NEG_INFINITY; classifiers];
    for i in 0..classifiers {
        if slot[i] != usize::MAX {
            t_hat[i] = solution[slot[i]];
        }
    }
    let residual = used
        .iter()
        .map(|p| (p.log_abs - t_hat[p.i] - t_hat[p.j]).powi(2))
        .sum();
    Ok(DiagonalFit {
        t_hat,
        residual,
        equations_used: used.len(),
        pair_counts,
        excluded,
    })
}

fn masked_pairs(summary: &CovarianceSummary) -> Result<Vec<(usize, usize)>> {
    let mask = summary.mask.as_ref().ok_or(Error::MissingSignificance)?;
    let m = summary.classifiers();
    Ok((0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .filter(|&(i, j)| mask[(i, j)])
        .collect())
}

/// Unweighted log-linear fit over the masked pairs.
pub fn fit_diagonal_linear(summary: &CovarianceSummary) -> Result<DiagonalFit> {
    fit_diagonal_linear_with(summary, DisconnectedPolicy::Error)
}

pub fn fit_diagonal_linear_with(
    summary: &CovarianceSummary,
    policy: DisconnectedPolicy,
) -> Result<DiagonalFit> {
    let pairs: Vec<LogPair> = masked_pairs(summary)?
        .into_iter()
        .map(|(i, j)| LogPair {
            i,
            j,
            log_abs: summary.q_hat[(i, j)].abs().ln(),
            weight: 1.0,
        })
        .collect();
    solve_log_linear(summary.classifiers(), &pairs, policy)
}

/// Log-linear fit weighted by `q_ij^2 / Var[q_ij]`; zero-variance pairs are skipped.
pub fn fit_diagonal_weighted(summary: &CovarianceSummary) -> Result<DiagonalFit> {
    fit_diagonal_weighted_with(summary, DisconnectedPolicy::Error)
}

pub fn fit_diagonal_weighted_with(
    summary: &CovarianceSummary,
    policy: DisconnectedPolicy,
) -> Result<DiagonalFit> {
    let var = summary.var_hat.as_ref().ok_or(Error::MissingSignificance)?;
    let pairs: Vec<LogPair> = masked_pairs(summary)?
        .into_iter()
        .filter(|&(i, j)| var[(i, j)] > 0.0)
        .map(|(i, j)| {
            let q = summary.q_hat[(i, j)];
            LogPair {
                i,
                j,
                log_abs: q.abs().ln(),
                weight: q * q / var[(i, j)],
            }
        })
        .collect();
    solve_log_linear(summary.classifiers(), &pairs, policy)
}

/// `q_hat` with its diagonal replaced by the fitted estimates.
pub fn reconstruct(q_hat: &DMatrix<f64>, fit: &DiagonalFit) -> DMatrix<f64> {
    let mut r = q_hat.clone();
    for (i, d) in fit.diagonal().into_iter().enumerate() {
        r[(i, i)] = d;
    }
    r
}
