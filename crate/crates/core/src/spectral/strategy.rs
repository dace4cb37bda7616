//! The four interchangeable ways of building the rank-one estimate,
//! registered by name.

use nalgebra::DMatrix;

use super::diagonal::{self, DiagonalFit};
use super::relaxation;
use super::{RecoveryMethod, RecoveryOptions};
use crate::covariance::CovarianceSummary;
use crate::error::Result;
use crate::flags::Warning;
use crate::registry::Registry;

/// Output of a recovery strategy, before eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub r_hat: DMatrix<f64>,
    pub diagonal_fit: Option<DiagonalFit>,
    pub warnings: Vec<Warning>,
}

pub trait RankOneRecovery: Send + Sync {
    fn method(&self) -> RecoveryMethod;

    fn name(&self) -> &'static str {
        self.method().key()
    }

    fn reconstruct(&self, summary: &CovarianceSummary, options: &RecoveryOptions) -> Result<Reconstruction>;
}

fn fit_warnings(fit: &DiagonalFit) -> Vec<Warning> {
    let mut out: Vec<Warning> = fit
        .excluded
        .iter()
        .map(|&classifier| Warning::ExcludedClassifier { classifier })
        .collect();
    out.extend(
        fit.low_confidence()
            .into_iter()
            .filter(|i| !fit.excluded.contains(i))
            .map(|classifier| Warning::LowConfidence {
                classifier,
                pairs: fit.pair_counts[classifier],
            }),
    );
    out
}

fn from_fit(summary: &CovarianceSummary, fit: DiagonalFit) -> Reconstruction {
    Reconstruction {
        r_hat: diagonal::reconstruct(&summary.q_hat, &fit),
        warnings: fit_warnings(&fit),
        diagonal_fit: Some(fit),
    }
}

pub struct LinearSystem;

impl RankOneRecovery for LinearSystem {
    fn method(&self) -> RecoveryMethod {
        RecoveryMethod::LinearSystem
    }

    fn reconstruct(&self, summary: &CovarianceSummary, options: &RecoveryOptions) -> Result<Reconstruction> {
        let fit = diagonal::fit_diagonal_linear_with(summary, options.disconnected)?;
        Ok(from_fit(summary, fit))
    }
}

pub struct WeightedLinearSystem;

impl RankOneRecovery for WeightedLinearSystem {
    fn method(&self) -> RecoveryMethod {
        RecoveryMethod::WeightedLinearSystem
    }

    fn reconstruct(&self, summary: &CovarianceSummary, options: &RecoveryOptions) -> Result<Reconstruction> {
        let fit = diagonal::fit_diagonal_weighted_with(summary, options.disconnected)?;
        Ok(from_fit(summary, fit))
    }
}

pub struct TraceRelaxation;

impl RankOneRecovery for TraceRelaxation {
    fn method(&self) -> RecoveryMethod {
        RecoveryMethod::TraceRelaxation
    }

    fn reconstruct(&self, summary: &CovarianceSummary, options: &RecoveryOptions) -> Result<Reconstruction> {
        let theta = options
            .theta
            .unwrap_or_else(|| relaxation::default_theta(&summary.q_hat));
        let out = relaxation::trace_relaxation(&summary.q_hat, theta, options.tol, options.max_iter);
        let warnings = if out.converged {
            Vec::new()
        } else {
            vec![Warning::NonConvergence {
                iterations: out.iterations,
            }]
        };
        Ok(Reconstruction {
            r_hat: out.r_hat,
            diagonal_fit: None,
            warnings,
        })
    }
}

pub struct DirectEigen;

impl RankOneRecovery for DirectEigen {
    fn method(&self) -> RecoveryMethod {
        RecoveryMethod::DirectEigen
    }

    fn reconstruct(&self, summary: &CovarianceSummary, _options: &RecoveryOptions) -> Result<Reconstruction> {
        Ok(Reconstruction {
            r_hat: summary.q_hat.clone(),
            diagonal_fit: None,
            warnings: Vec::new(),
        })
    }
}

/// Registry holding the four built-in strategies under their keys.
pub fn default_recoveries() -> Registry<dyn RankOneRecovery> {
    let mut reg: Registry<dyn RankOneRecovery> = Registry::new("recovery method");
    let all: [Box<dyn RankOneRecovery>; 4] = [
        Box::new(LinearSystem),
        Box::new(WeightedLinearSystem),
        Box::new(TraceRelaxation),
        Box::new(DirectEigen),
    ];
    for strategy in all {
        reg.register(strategy.name(), strategy);
    }
    reg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_keys_round_trip() {
        let reg = default_recoveries();
        assert_eq!(reg.names(), vec!["linear", "weighted", "trace", "eigen"]);
        for method in RecoveryMethod::ALL {
            assert_eq!(reg.get(method.key()).unwrap().method(), method);
        }
    }
}
