//! Meta-learners turning the prediction matrix into one label per instance.

pub mod em;
pub mod mle;
pub mod strategy;

use rand::Rng as _;
use serde::Serialize;

pub use em::{imle, EmOptions, EmState};
pub use mle::{exact_mle_enumeration, mle_predict, mle_weights, MleWeights, DEFAULT_CLAMP};
pub use strategy::{default_meta_learners, MetaContext, MetaLearner, MetaOutcome};

use crate::model::{LabelVector, PredictionMatrix};
use crate::rng::rng_from_seed;

/// How a zero score is turned into a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieRule {
    /// Fair coin from a generator seeded with the given seed.
    Coin(u64),
    /// Always +1.
    Positive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaPrediction {
    pub labels: LabelVector,
    pub method: String,
    pub weights: Option<Vec<f64>>,
    pub tie_count: usize,
    pub rng_seed: Option<u64>,
}

/// Relative size below which a score counts as an exact tie.
const TIE_TOL: f64 = 1e-12;

/// `sign(sum_i w_i f_i + offset)` for every row, with ties resolved by `tie`.
pub fn weighted_sign(
    predictions: &PredictionMatrix,
    weights: &[f64],
    offset: f64,
    tie: TieRule,
) -> (LabelVector, usize) {
    assert_eq!(weights.len(), predictions.classifiers(), "one weight per classifier");
    let scale = weights.iter().map(|w| w.abs()).sum::<f64>() + offset.abs();
    let mut coin = match tie {
        TieRule::Coin(seed) => Some(rng_from_seed(seed)),
        TieRule::Positive => None,
    };
    let mut ties = 0;
    let labels = predictions
        .rows()
        .map(|row| {
            let score: f64 = row.iter().zip(weights).map(|(&f, w)| f as f64 * w).sum::<f64>() + offset;
            if score.abs() <= TIE_TOL * scale {
                ties += 1;
                match coin.as_mut().map(|rng| rng.gen_bool(0.5)) {
                    Some(false) => -1,
                    _ => 1,
                }
            } else if score > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    (LabelVector::new(labels).expect("labels are +/-1"), ties)
}

/// Unweighted majority, ties broken by a seeded fair coin.
pub fn majority_vote(predictions: &PredictionMatrix, seed: u64) -> MetaPrediction {
    let weights = vec![1.0; predictions.classifiers()];
    let (labels, tie_count) = weighted_sign(predictions, &weights, 0.0, TieRule::Coin(seed));
    MetaPrediction {
        labels,
        method: "vote".into(),
        weights: None,
        tie_count,
        rng_seed: Some(seed),
    }
}

/// Spectral meta-learner: sign of the eigenvector-weighted vote.
pub fn sml_predict(predictions: &PredictionMatrix, v_hat: &[f64], seed: u64) -> MetaPrediction {
    let (labels, tie_count) = weighted_sign(predictions, v_hat, 0.0, TieRule::Coin(seed));
    MetaPrediction {
        labels,
        method: "sml".into(),
        weights: Some(v_hat.to_vec()),
        tie_count,
        rng_seed: Some(seed),
    }
}
