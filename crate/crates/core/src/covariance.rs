//! Sample covariance of classifier outputs, plug-in variances of its
//! off-diagonal entries, and the significance mask used for diagonal recovery.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::PredictionMatrix;

/// Threshold multiplier on the standard deviation of an off-diagonal entry.
pub const DEFAULT_SIGNIFICANCE_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSummary {
    pub q_hat: DMatrix<f64>,
    pub mu_hat: DVector<f64>,
    pub instances: usize,
    pub var_hat: Option<DMatrix<f64>>,
    pub mask: Option<DMatrix<bool>>,
}

impl CovarianceSummary {
    pub fn classifiers(&self) -> usize {
        self.q_hat.nrows()
    }

    /// Fills in entry variances and the mask at the given threshold factor.
    pub fn with_significance(mut self, factor: f64) -> Self {
        let var = entry_variance(&self, self.instances);
        self.mask = Some(significance_mask(&self.q_hat, &var, factor));
        self.var_hat = Some(var);
        self
    }

    /// Number of masked off-diagonal pairs (each unordered pair counted once).
    pub fn masked_pairs(&self) -> usize {
        self.mask.as_ref().map_or(0, |mask| {
            let m = mask.nrows();
            (0..m)
                .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
                .filter(|&(i, j)| mask[(i, j)])
                .count()
        })
    }
}

/// Unbiased (S-1 denominator) sample covariance and column means.
///
/// Products of +/-1 labels are summed as integers, so every entry is exact
/// up to the final division and the result is symmetric bit-for-bit.
pub fn sample_covariance(predictions: &PredictionMatrix) -> Result<CovarianceSummary> {
    let s = predictions.instances();
    if s < 2 {
        return Err(Error::TooFewInstances(s));
    }
    let m = predictions.classifiers();
    let mut sums = vec![0i64; m];
    let mut cross = vec![0i64; m * m];
    for row in predictions.rows() {
        for (i, &fi) in row.iter().enumerate() {
            let fi = fi as i64;
            sums[i] += fi;
            let base = i * m;
            for (j, &fj) in row.iter().enumerate().skip(i) {
                cross[base + j] += fi * fj as i64;
            }
        }
    }
    let sf = s as f64;
    let mut q = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let centered = cross[i * m + j] as f64 - (sums[i] as f64) * (sums[j] as f64) / sf;
            let v = centered / (sf - 1.0);
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    let mu = DVector::from_iterator(m, sums.iter().map(|&t| t as f64 / sf));
    Ok(CovarianceSummary {
        q_hat: q,
        mu_hat: mu,
        instances: s,
        var_hat: None,
        mask: None,
    })
}

/// Plug-in variance of each covariance entry for `instances` samples.
///
/// Uses the finite-sample formula for +/-1 variables with the estimated
/// means and covariances substituted for the population ones. Negative
/// values, possible only through the plug-in, are clamped to zero.
pub fn entry_variance(summary: &CovarianceSummary, instances: usize) -> DMatrix<f64> {
    let m = summary.classifiers();
    let s = instances as f64;
    let mu = &summary.mu_hat;
    DMatrix::from_fn(m, m, |i, j| {
        let q = summary.q_hat[(i, j)];
        let base = (1.0 - mu[i] * mu[i]) * (1.0 - mu[j] * mu[j]) / (s - 1.0);
        let cross = q / s * (4.0 * mu[i] * mu[j] - (s - 2.0) / (s - 1.0) * q);
        (base + cross).max(0.0)
    })
}

/// Off-diagonal entries whose magnitude exceeds `factor` standard deviations.
pub fn significance_mask(q_hat: &DMatrix<f64>, var_hat: &DMatrix<f64>, factor: f64) -> DMatrix<bool> {
    let m = q_hat.nrows();
    DMatrix::from_fn(m, m, |i, j| {
        i != j && q_hat[(i, j)].abs() > factor * var_hat[(i, j)].sqrt()
    })
}

/// Covariance, entry variances and mask in one call.
pub fn summarize(predictions: &PredictionMatrix, factor: f64) -> Result<CovarianceSummary> {
    Ok(sample_covariance(predictions)?.with_significance(factor))
}
