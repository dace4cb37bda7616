//! Spectral ranking: rebuild the rank-one part of the classifier covariance,
//! take its leading eigenvector, fix its sign and sort.

pub mod diagonal;
pub mod eigen;
pub mod relaxation;
pub mod strategy;

use nalgebra::DMatrix;
use serde::Serialize;

pub use diagonal::{
    fit_diagonal_linear, fit_diagonal_weighted, solve_log_linear, DiagonalFit, DisconnectedPolicy, LogPair,
};
pub use eigen::{leading_eigenpair, EigenPair};
pub use strategy::{default_recoveries, RankOneRecovery, Reconstruction};

use crate::covariance::{self, CovarianceSummary, DEFAULT_SIGNIFICANCE_FACTOR};
use crate::error::{Error, Result};
use crate::flags::Warning;
use crate::model::PredictionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMethod {
    LinearSystem,
    WeightedLinearSystem,
    TraceRelaxation,
    DirectEigen,
}

impl RecoveryMethod {
    pub const ALL: [RecoveryMethod; 4] = [
        RecoveryMethod::LinearSystem,
        RecoveryMethod::WeightedLinearSystem,
        RecoveryMethod::TraceRelaxation,
        RecoveryMethod::DirectEigen,
    ];

    /// Registry key.
    pub fn key(self) -> &'static str {
        match self {
            RecoveryMethod::LinearSystem => "linear",
            RecoveryMethod::WeightedLinearSystem => "weighted",
            RecoveryMethod::TraceRelaxation => "trace",
            RecoveryMethod::DirectEigen => "eigen",
        }
    }
}

/// How the eigenvector sign ambiguity is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// Entries sum to a nonnegative value.
    #[default]
    SumNonNegative,
    /// At least as many positive entries as negative ones.
    MajorityPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryOptions {
    pub factor: f64,
    /// Trace penalty; `None` uses [`relaxation::default_theta`].
    pub theta: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub disconnected: DisconnectedPolicy,
    pub sign: SignConvention,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            factor: DEFAULT_SIGNIFICANCE_FACTOR,
            theta: None,
            tol: 1e-10,
            max_iter: 20_000,
            disconnected: DisconnectedPolicy::Exclude,
            sign: SignConvention::SumNonNegative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankOneEstimate {
    pub method: RecoveryMethod,
    #[serde(skip)]
    pub r_hat: DMatrix<f64>,
    pub lambda_hat: f64,
    pub v_hat: Vec<f64>,
    /// Classifier indices (0-based) by descending eigenvector entry.
    pub ranking: Vec<usize>,
    pub low_confidence: Vec<usize>,
    pub masked_pairs: usize,
    pub diagonal_fit: Option<DiagonalFit>,
    pub warnings: Vec<Warning>,
}

impl RankOneEstimate {
    /// Classifier with the largest |v_i|, lowest index on ties.
    pub fn strongest(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.v_hat.iter().enumerate() {
            if v.abs() > self.v_hat[best].abs() {
                best = i;
            }
        }
        best
    }
}

/// Flips `v` to the chosen sign convention and ranks entries descending,
/// ties broken by ascending index. Flags an exact balance without flipping.
pub fn resolve_sign_and_rank(v: &[f64], convention: SignConvention) -> (Vec<f64>, Vec<usize>, Option<Warning>) {
    let score = match convention {
        SignConvention::SumNonNegative => v.iter().sum::<f64>(),
        SignConvention::MajorityPositive => {
            v.iter().map(|&x| (x > 0.0) as i64 as f64 - (x < 0.0) as i64 as f64).sum()
        }
    };
    let warning = (score == 0.0).then_some(Warning::ExactBalance);
    let resolved: Vec<f64> = if score < 0.0 {
        v.iter().map(|x| -x).collect()
    } else {
        v.to_vec()
    };
    let mut ranking: Vec<usize> = (0..v.len()).collect();
    ranking.sort_by(|&a, &b| resolved[b].total_cmp(&resolved[a]).then(a.cmp(&b)));
    (resolved, ranking, warning)
}

/// Leading eigenpair of `r_hat`, with a full decomposition as fallback.
fn eigenpair_with_fallback(r_hat: &DMatrix<f64>, warnings: &mut Vec<Warning>) -> EigenPair {
    match leading_eigenpair(r_hat) {
        Ok(pair) => pair,
        Err(_) => {
            warnings.push(Warning::EigenFallback);
            eigen::full_leading_eigenpair(r_hat)
        }
    }
}

/// Finishes an estimate from a reconstructed matrix.
pub fn finish_estimate(
    method: RecoveryMethod,
    reconstruction: Reconstruction,
    summary: &CovarianceSummary,
    options: &RecoveryOptions,
) -> RankOneEstimate {
    let Reconstruction {
        r_hat,
        diagonal_fit,
        mut warnings,
    } = reconstruction;
    let pair = eigenpair_with_fallback(&r_hat, &mut warnings);
    let (v_hat, ranking, balance) = resolve_sign_and_rank(pair.vector.as_slice(), options.sign);
    warnings.extend(balance);
    let low_confidence = diagonal_fit.as_ref().map(DiagonalFit::low_confidence).unwrap_or_default();
    RankOneEstimate {
        method,
        r_hat,
        lambda_hat: pair.value,
        v_hat,
        ranking,
        low_confidence,
        masked_pairs: summary.masked_pairs(),
        diagonal_fit,
        warnings,
    }
}

/// Ranks classifiers from a covariance summary with the given strategy.
pub fn rank_from_summary(
    summary: &CovarianceSummary,
    recovery: &dyn RankOneRecovery,
    options: &RecoveryOptions,
) -> Result<RankOneEstimate> {
    let reconstruction = recovery.reconstruct(summary, options)?;
    Ok(finish_estimate(recovery.method(), reconstruction, summary, options))
}

/// Full pipeline: covariance, significance mask, reconstruction, eigenvector, ranking.
pub fn rank_classifiers(
    predictions: &PredictionMatrix,
    recovery: &dyn RankOneRecovery,
    options: &RecoveryOptions,
) -> Result<RankOneEstimate> {
    let summary = covariance::summarize(predictions, options.factor)?;
    rank_from_summary(&summary, recovery, options)
}

/// [`rank_classifiers`] with the strategy looked up by registry key.
pub fn rank_classifiers_by_name(
    predictions: &PredictionMatrix,
    method: &str,
    options: &RecoveryOptions,
) -> Result<RankOneEstimate> {
    let registry = default_recoveries();
    rank_classifiers(predictions, registry.get(method)?, options)
}

/// Trace-relaxation estimate straight from a summary.
pub fn recover_trace_relaxation(
    summary: &CovarianceSummary,
    theta: f64,
    tol: f64,
    max_iter: usize,
) -> Result<RankOneEstimate> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
    }
    let options = RecoveryOptions {
        theta: Some(theta),
        tol,
        max_iter,
        ..RecoveryOptions::default()
    };
    rank_from_summary(summary, &strategy::TraceRelaxation, &options)
}
