//! Scoring, ranking quality, Monte-Carlo summaries and analytic oracles.

pub mod lemma;
pub mod ranking;

use serde::Serialize;

pub use lemma::{
    binomial_cdf, binomial_pmf, hoeffding_gap_bound, lemma_brute_force, lemma_voting_sml_sensitivities,
    LemmaSensitivities, TieConvention,
};
pub use ranking::{kendall_tau, ranking_quality, RankingQuality};

use crate::error::{Error, Result};
use crate::model::{confusion_stats, LabelVector};

/// Balanced accuracy of `predictions` against `truth`.
pub fn balanced_accuracy(predictions: &LabelVector, truth: &LabelVector) -> Result<f64> {
    Ok(confusion_stats(predictions.as_slice(), truth)?.pi())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alignment {
    pub cos2: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// `(w . v)^2` against the gap bound `1 - 2 / lambda`.
pub fn eigen_alignment(w: &[f64], v: &[f64], lambda: f64) -> Result<Alignment> {
    if w.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            actual: v.len(),
        });
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let dot: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
    let cos2 = dot * dot;
    let bound = 1.0 - 2.0 / lambda;
    Ok(Alignment {
        cos2,
        bound,
        satisfied: cos2 >= bound - 1e-12,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Standard error of the mean (sample standard deviation over sqrt(n)).
    pub stderr: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn monte_carlo_summary(runs: &[f64]) -> Result<Summary> {
    if runs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = runs.len();
    let mean = runs.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let var = runs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = runs.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Summary {
        count: n,
        mean,
        stderr,
        median: quantile(&sorted, 0.5),
        q1: quantile(&sorted, 0.25),
        q3: quantile(&sorted, 0.75),
        min: sorted[0],
        max: sorted[n - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alignment_cases() {
        let w = [0.6, 0.8];
        let a = eigen_alignment(&w, &w, 10.0).unwrap();
        assert!((a.cos2 - 1.0).abs() < 1e-15 && a.satisfied);
        let a = eigen_alignment(&[1.0, 0.0], &[0.0, 1.0], 2.0).unwrap();
        assert_eq!((a.cos2, a.bound, a.satisfied), (0.0, 0.0, true));
        // M = 50 classifiers at pi = 0.75 and b = 0: lambda = 12.5.
        let bound = eigen_alignment(&w, &w, 50.0 * 0.25).unwrap().bound;
        assert!((bound - 0.84).abs() < 1e-15);
    }

    #[test]
    fn summary_cases() {
        let s = monte_carlo_summary(&[0.7]).unwrap();
        assert_eq!((s.mean, s.median, s.q1, s.q3, s.stderr), (0.7, 0.7, 0.7, 0.7, 0.0));
        assert_eq!(monte_carlo_summary(&[0.0, 1.0]).unwrap().mean, 0.5);
        let s = monte_carlo_summary(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((s.median, s.q1, s.q3), (3.0, 2.0, 4.0));
        assert!((s.stderr - (2.5f64 / 5.0).sqrt()).abs() < 1e-15);
        assert_eq!(monte_carlo_summary(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn balanced_accuracy_of_truth() {
        let t = LabelVector::new(vec![1, -1, 1]).unwrap();
        assert_eq!(balanced_accuracy(&t, &t).unwrap(), 1.0);
    }
}
