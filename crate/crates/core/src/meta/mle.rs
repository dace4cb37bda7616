//! Maximum-likelihood labels for known sensitivities and specificities.

use serde::Serialize;

use super::{weighted_sign, MetaPrediction, TieRule};
use crate::error::{Error, Result};
use crate::model::{ClassifierPerformance, LabelVector, PredictionMatrix};

/// Sensitivities and specificities are clamped into [eps, 1 - eps].
pub const DEFAULT_CLAMP: f64 = 1e-3;

/// Largest ensemble accepted by [`exact_mle_enumeration`].
pub const ENUMERATION_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MleWeights {
    pub log_alpha: Vec<f64>,
    pub log_beta: Vec<f64>,
}

impl MleWeights {
    pub fn offset(&self) -> f64 {
        self.log_beta.iter().sum()
    }
}

/// `log alpha_i = log(psi eta / ((1-psi)(1-eta)))`,
/// `log beta_i = log(psi (1-psi) / (eta (1-eta)))`, after clamping.
pub fn mle_weights(perfs: &[ClassifierPerformance], clamp: f64) -> MleWeights {
    let (log_alpha, log_beta) = perfs
        .iter()
        .map(|p| {
            let p = p.clamped(clamp);
            let (lp, lq) = (p.psi.ln(), (1.0 - p.psi).ln());
            let (le, lf) = (p.eta.ln(), (1.0 - p.eta).ln());
            (lp + le - lq - lf, lp + lq - le - lf)
        })
        .unzip();
    MleWeights { log_alpha, log_beta }
}

/// `sign(sum_i f_i log alpha_i + sum_i log beta_i)` per instance.
pub fn mle_predict_with(predictions: &PredictionMatrix, weights: &MleWeights, tie: TieRule) -> MetaPrediction {
    let (labels, tie_count) = weighted_sign(predictions, &weights.log_alpha, weights.offset(), tie);
    MetaPrediction {
        labels,
        method: "mle".into(),
        weights: Some(weights.log_alpha.clone()),
        tie_count,
        rng_seed: match tie {
            TieRule::Coin(seed) => Some(seed),
            TieRule::Positive => None,
        },
    }
}

pub fn mle_predict(predictions: &PredictionMatrix, weights: &MleWeights, seed: u64) -> MetaPrediction {
    mle_predict_with(predictions, weights, TieRule::Coin(seed))
}

/// Per-instance argmax of the two class likelihoods, evaluated as direct
/// products of `Pr(f_i | y)`. Exact ties go to +1.
pub fn exact_mle_enumeration(predictions: &PredictionMatrix, perfs: &[ClassifierPerformance]) -> Result<LabelVector> {
    let m = predictions.classifiers();
    if m > ENUMERATION_LIMIT {
        return Err(Error::GuardExceeded {
            limit: ENUMERATION_LIMIT,
            actual: m,
        });
    }
    if perfs.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: perfs.len(),
        });
    }
    let labels = predictions
        .rows()
        .map(|row| {
            let mut pos = 1.0;
            let mut neg = 1.0;
            for (&f, p) in row.iter().zip(perfs) {
                if f == 1 {
                    pos *= p.psi;
                    neg *= 1.0 - p.eta;
                } else {
                    pos *= 1.0 - p.psi;
                    neg *= p.eta;
                }
            }
            if pos >= neg {
                1
            } else {
                -1
            }
        })
        .collect();
    LabelVector::new(labels)
}

/// Classification log-likelihood `sum_k sum_i log Pr(f_ik | y_k)`.
pub fn log_likelihood(predictions: &PredictionMatrix, labels: &LabelVector, perfs: &[ClassifierPerformance]) -> f64 {
    let logs: Vec<[f64; 4]> = perfs
        .iter()
        .map(|p| [p.psi.ln(), (1.0 - p.psi).ln(), p.eta.ln(), (1.0 - p.eta).ln()])
        .collect();
    predictions
        .rows()
        .zip(labels.as_slice())
        .map(|(row, &y)| {
            row.iter()
                .zip(&logs)
                .map(|(&f, l)| match (y, f) {
                    (1, 1) => l[0],
                    (1, _) => l[1],
                    (_, -1) => l[2],
                    _ => l[3],
                })
                .sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perf(psi: f64, eta: f64) -> ClassifierPerformance {
        ClassifierPerformance::population(psi, eta).unwrap()
    }

    #[test]
    fn uninformative_classifier_has_zero_weights() {
        let w = mle_weights(&[perf(0.5, 0.5)], DEFAULT_CLAMP);
        assert!(w.log_alpha[0].abs() < 1e-15);
        assert!(w.log_beta[0].abs() < 1e-15);
    }

    #[test]
    fn hand_evaluated_weights() {
        let w = mle_weights(&[perf(0.8, 0.7)], DEFAULT_CLAMP);
        assert!((w.log_alpha[0] - (0.56f64 / 0.06).ln()).abs() < 1e-12);
        assert!((w.log_alpha[0] - 2.2336).abs() < 1e-4);
        assert!((w.log_beta[0] - (0.16f64 / 0.21).ln()).abs() < 1e-12);
        assert!((w.log_beta[0] + 0.2719).abs() < 1e-4);
    }

    #[test]
    fn perfect_classifier_is_clamped() {
        let w = mle_weights(&[perf(1.0, 0.9)], DEFAULT_CLAMP);
        assert!(w.log_alpha[0].is_finite() && w.log_beta[0].is_finite());
        let expected = (0.999f64 * 0.9 / (0.001 * 0.1)).ln();
        assert!((w.log_alpha[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn single_classifier_sign() {
        let p = PredictionMatrix::from_row_major(vec![1, 1, -1, -1], 2, 2).unwrap();
        let w = MleWeights {
            log_alpha: vec![2.2, 0.0],
            log_beta: vec![-0.27, 0.0],
        };
        assert_eq!(mle_predict(&p, &w, 0).labels.as_slice(), &[1, -1]);
    }

    #[test]
    fn uniform_weights_reduce_to_vote() {
        let p = PredictionMatrix::from_row_major(vec![1, 1, -1, -1, -1, 1, 1, -1, -1, 1, 1, 1], 4, 3).unwrap();
        let w = MleWeights {
            log_alpha: vec![1.0; 3],
            log_beta: vec![0.0; 3],
        };
        assert_eq!(mle_predict(&p, &w, 5).labels, super::super::majority_vote(&p, 5).labels);
    }

    #[test]
    fn enumeration_with_random_classifiers_goes_positive() {
        let p = PredictionMatrix::from_row_major(vec![1, -1, -1, -1, 1, 1], 3, 2).unwrap();
        let labels = exact_mle_enumeration(&p, &[perf(0.5, 0.5), perf(0.5, 0.5)]).unwrap();
        assert_eq!(labels.as_slice(), &[1, 1, 1]);
    }

    #[test]
    fn enumeration_with_near_perfect_classifiers_returns_columns() {
        let truth = [1i8, -1, -1, 1, -1];
        let cols = vec![truth.to_vec(); 3];
        let p = PredictionMatrix::from_columns(&cols).unwrap();
        let perfs = vec![perf(0.999, 0.999); 3];
        assert_eq!(exact_mle_enumeration(&p, &perfs).unwrap().as_slice(), &truth);
    }

    #[test]
    fn enumeration_guard() {
        let p = PredictionMatrix::from_row_major(vec![1; 26], 2, 13).unwrap();
        assert!(matches!(
            exact_mle_enumeration(&p, &vec![perf(0.6, 0.6); 13]),
            Err(Error::GuardExceeded { limit: 12, actual: 13 })
        ));
    }
}
