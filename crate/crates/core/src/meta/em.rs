//! Dawid-Skene style alternating maximization of the classification
//! likelihood over labels and per-classifier (psi, eta).

use serde::Serialize;

use super::mle::{log_likelihood, mle_predict_with, mle_weights, DEFAULT_CLAMP};
use super::TieRule;
use crate::error::{Error, Result};
use crate::flags::Warning;
use crate::model::{ClassifierPerformance, LabelVector, PredictionMatrix, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmOptions {
    pub clamp: f64,
    pub max_iter: usize,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            clamp: DEFAULT_CLAMP,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmState {
    pub labels: LabelVector,
    pub performances: Vec<ClassifierPerformance>,
    pub iteration: usize,
    pub log_likelihood: f64,
    pub converged: bool,
    /// Log-likelihood after every parameter step and every label step.
    pub trace: Vec<f64>,
    pub warnings: Vec<Warning>,
}

/// Clamped empirical (psi, eta) of every column against `labels`.
///
/// If `labels` lack a class, the rate that class would define keeps its
/// value from `previous`; the returned flag reports this.
pub fn estimate_performances(
    predictions: &PredictionMatrix,
    labels: &LabelVector,
    previous: &[ClassifierPerformance],
    clamp: f64,
) -> (Vec<ClassifierPerformance>, bool) {
    let m = predictions.classifiers();
    let mut tp = vec![0usize; m];
    let mut tn = vec![0usize; m];
    for (row, &y) in predictions.rows().zip(labels.as_slice()) {
        for (i, &f) in row.iter().enumerate() {
            if y == 1 && f == 1 {
                tp[i] += 1;
            } else if y == -1 && f == -1 {
                tn[i] += 1;
            }
        }
    }
    let pos = labels.positives();
    let neg = labels.negatives();
    let perfs = (0..m)
        .map(|i| {
            let psi = if pos > 0 { tp[i] as f64 / pos as f64 } else { previous[i].psi };
            let eta = if neg > 0 { tn[i] as f64 / neg as f64 } else { previous[i].eta };
            ClassifierPerformance {
                psi,
                eta,
                provenance: Provenance::Empirical,
            }
            .clamped(clamp)
        })
        .collect();
    (perfs, pos == 0 || neg == 0)
}

/// Alternates parameter estimation and maximum-likelihood relabeling from
/// `init` until the labels stop changing or `max_iter` passes are done.
/// Ties in the relabeling go to +1 so the map is deterministic.
pub fn imle(predictions: &PredictionMatrix, init: &LabelVector, options: &EmOptions) -> Result<EmState> {
    if init.len() != predictions.instances() {
        return Err(Error::DimensionMismatch {
            expected: predictions.instances(),
            actual: init.len(),
        });
    }
    if options.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    let m = predictions.classifiers();
    let mut perfs = vec![
        ClassifierPerformance {
            psi: 0.5,
            eta: 0.5,
            provenance: Provenance::Empirical,
        };
        m
    ];
    let mut labels = init.clone();
    let mut trace = Vec::with_capacity(2 * options.max_iter);
    let mut warnings = Vec::new();
    let mut converged = false;
    let mut iteration = 0;
    while iteration < options.max_iter {
        iteration += 1;
        let (next_perfs, degenerate) = estimate_performances(predictions, &labels, &perfs, options.clamp);
        if degenerate {
            warnings.push(Warning::DegenerateLabels { iteration });
        }
        perfs = next_perfs;
        trace.push(log_likelihood(predictions, &labels, &perfs));
        let weights = mle_weights(&perfs, options.clamp);
        let relabeled = mle_predict_with(predictions, &weights, TieRule::Positive).labels;
        trace.push(log_likelihood(predictions, &relabeled, &perfs));
        if relabeled == labels {
            converged = true;
            break;
        }
        labels = relabeled;
    }
    Ok(EmState {
        labels,
        performances: perfs,
        iteration,
        log_likelihood: *trace.last().expect("at least one pass"),
        converged,
        trace,
        warnings,
    })
}
