//! Explicit rank-two eigendecomposition of the off-diagonal covariance of an
//! ensemble with one cartel.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use serde::Serialize;

use super::population::signed_accuracies;
use crate::error::{Error, Result};
use crate::flags::Warning;
use crate::model::EnsembleSpec;

/// Denominators smaller than this are treated as zero.
const DENOMINATOR_TOL: f64 = 1e-14;
/// Candidate angle pairs whose residual is within this of the best one are
/// considered equivalent; the smallest |alpha| + |beta| wins.
const BRANCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankTwoSpectrum {
    pub lambda1: f64,
    pub lambda2: f64,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub lambda_p: f64,
    pub lambda_c: f64,
    pub k1: f64,
    pub k2: f64,
    pub warnings: Vec<Warning>,
}

impl RankTwoSpectrum {
    /// `lambda1 e1_i e1_j + lambda2 e2_i e2_j`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.lambda1 * self.e1[i] * self.e1[j] + self.lambda2 * self.e2[i] * self.e2[j]
    }
}

/// Half-angle of `atan(num / den)`; a vanishing denominator takes the limit
/// `+/- pi/4` and is reported.
fn half_atan(num: f64, den: f64, name: &'static str, warnings: &mut Vec<Warning>) -> f64 {
    if den.abs() <= DENOMINATOR_TOL {
        warnings.push(Warning::DegenerateDenominator { angle: name });
        if num == 0.0 {
            0.0
        } else {
            num.signum() * FRAC_PI_2 / 2.0
        }
    } else {
        0.5 * (num / den).atan()
    }
}

/// Picks the representative of `alpha0 + k pi/2`, `beta0 + l pi/2` that
/// solves `sin(alpha + beta) = k1` and `sin 2 alpha = -k2 sin 2 beta`.
fn select_branch(alpha0: f64, beta0: f64, k1: f64, k2: f64) -> (f64, f64) {
    let shifts = [0.0, FRAC_PI_2, -FRAC_PI_2, 2.0 * FRAC_PI_2];
    let mut candidates = Vec::with_capacity(16);
    for da in shifts {
        for db in shifts {
            let (a, b) = (alpha0 + da, beta0 + db);
            let residual = ((a + b).sin() - k1).abs() + ((2.0 * a).sin() + k2 * (2.0 * b).sin()).abs();
            candidates.push((residual, a, b));
        }
    }
    let best = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    candidates
        .into_iter()
        .filter(|c| c.0 <= best + BRANCH_TOL)
        .min_by(|x, y| (x.1.abs() + x.2.abs()).total_cmp(&(y.1.abs() + y.2.abs())))
        .map(|c| (c.1, c.2))
        .expect("sixteen candidates")
}

/// Unit vector orthogonal to `e`, built from the first coordinate axis that
/// is not parallel to it.
fn orthogonal_unit(e: &DVector<f64>) -> DVector<f64> {
    let m = e.len();
    (0..m)
        .map(|k| {
            let mut x = DVector::zeros(m);
            x[k] = 1.0;
            let proj = e.dot(&x);
            x - e * proj
        })
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .map(|x| x.normalize())
        .expect("nonempty ensemble")
}

/// Eigenvalues, eigenvectors and angles of the rank-two off-diagonal
/// structure induced by a cartel.
pub fn rank_two_spectrum(spec: &EnsembleSpec) -> Result<RankTwoSpectrum> {
    let cartel = spec
        .cartel
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("rank-two spectrum needs a cartel".into()))?;
    if spec.honest.is_empty() {
        return Err(Error::InvalidParameter("rank-two spectrum needs honest classifiers".into()));
    }
    let u = 1.0 - spec.class_imbalance.powi(2);
    let (rho, tau) = signed_accuracies(spec);
    let lambda_p = u * rho.iter().map(|r| r * r).sum::<f64>();
    let lambda_c = u * tau.iter().map(|t| t * t).sum::<f64>();
    if !(lambda_p > 0.0) {
        return Err(Error::InvalidParameter("honest block has zero mass".into()));
    }
    let k1 = 2.0 * cartel.pi_c() - 1.0;
    let k2 = lambda_c / lambda_p;
    let mut warnings = Vec::new();
    let s = (1.0 - k1 * k1).max(0.0).sqrt();
    // tan 2a = -k2 sin 2(a+b) / (1 - k2 cos 2(a+b)) with sin 2(a+b) = 2 k1 sqrt(1 - k1^2).
    let alpha0 = half_atan(2.0 * k1 * s * k2, k2 * (1.0 - 2.0 * k1 * k1) - 1.0, "alpha", &mut warnings);
    let beta0 = half_atan(2.0 * k1 * s, 1.0 - k2 - 2.0 * k1 * k1, "beta", &mut warnings);
    let (alpha, beta) = select_branch(alpha0, beta0, k1, k2);

    let h = rho.len();
    let m = h + tau.len();
    let g1 = DVector::from_fn(m, |i, _| {
        if i < h {
            rho[i] * alpha.cos()
        } else {
            tau[i - h] * beta.sin()
        }
    });
    let g2 = DVector::from_fn(m, |i, _| {
        if i < h {
            rho[i] * alpha.sin()
        } else {
            tau[i - h] * beta.cos()
        }
    });
    let (n1, n2) = (g1.norm_squared(), g2.norm_squared());
    let lambda1 = u * n1;
    let lambda2 = u * n2;
    let e1 = g1.normalize();
    // g2 vanishes when the cartel (or the honest rotation) carries no mass.
    let e2 = if n2.sqrt() > 1e-12 * n1.sqrt() {
        g2.normalize()
    } else {
        orthogonal_unit(&e1)
    };
    Ok(RankTwoSpectrum {
        lambda1,
        lambda2,
        e1: e1.as_slice().to_vec(),
        e2: e2.as_slice().to_vec(),
        alpha,
        beta,
        lambda_p,
        lambda_c,
        k1,
        k2,
        warnings,
    })
}
