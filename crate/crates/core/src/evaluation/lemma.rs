//! Sensitivity of majority voting and SML for one distinct classifier among
//! `M - 1` identical ones, via the binomial CDF.

use serde::Serialize;

use crate::error::{Error, Result};

/// Distance from an integer below which a CDF argument counts as integral.
pub const TIE_TOL: f64 = 1e-9;

/// `F(k; n, p) = sum_{i <= floor(k)} C(n, i) p^i (1 - p)^(n - i)`.
///
/// Terms are accumulated in log space so large `n` does not underflow.
pub fn binomial_cdf(k: f64, n: u64, p: f64) -> f64 {
    if k < 0.0 {
        return 0.0;
    }
    if k >= n as f64 {
        return 1.0;
    }
    let top = k.floor() as u64;
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_choose = 0.0;
    let mut logs = Vec::with_capacity(top as usize + 1);
    for i in 0..=top {
        if i > 0 {
            log_choose += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        logs.push(log_choose + i as f64 * lp + (n - i) as f64 * lq);
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    (max + sum.ln()).exp().min(1.0)
}

/// Probability mass `Pr[X = i]` for `X ~ Bin(n, p)`.
pub fn binomial_pmf(i: u64, n: u64, p: f64) -> f64 {
    if i > n {
        return 0.0;
    }
    binomial_cdf(i as f64, n, p) - if i == 0 { 0.0 } else { binomial_cdf(i as f64 - 1.0, n, p) }
}

/// How a zero weighted score is resolved in the analytic expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TieConvention {
    /// A fair coin decides; exact for a coin-flipping ensemble.
    #[default]
    CoinFlip,
    /// Limit of the SML sensitivity as the relative weight approaches from below.
    LeftLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaSensitivities {
    pub psi_vote: f64,
    pub psi_sml: f64,
    /// Relative weight `(2 psi1 - 1) / (2 psi - 1)` of the distinct classifier.
    pub theta: f64,
}

fn nearest_integer(k: f64) -> Option<f64> {
    let r = k.round();
    ((k - r).abs() <= TIE_TOL).then_some(r)
}

/// `Pr[X > k] + w Pr[X = k]` for `X ~ Bin(n, p)`, where `w` is the weight
/// given to an exact tie when `k` is an integer.
fn upper_tail(k: f64, n: u64, p: f64, tie_weight: f64) -> f64 {
    match nearest_integer(k) {
        Some(r) if r >= 0.0 && r <= n as f64 => {
            let strictly_above = 1.0 - binomial_cdf(r, n, p);
            strictly_above + tie_weight * binomial_pmf(r as u64, n, p)
        }
        _ => 1.0 - binomial_cdf(k, n, p),
    }
}

fn check_lemma_inputs(m: usize, psi: f64, psi1: f64) -> Result<()> {
    if m < 3 || m % 2 == 0 {
        return Err(Error::InvalidEnsembleSize(m));
    }
    if !(psi > 0.5 && psi <= 1.0) {
        return Err(Error::InvalidHomogeneousAccuracy(psi));
    }
    if !(0.0..=1.0).contains(&psi1) {
        return Err(Error::InvalidParameter(format!("psi1 = {psi1} outside [0, 1]")));
    }
    Ok(())
}

/// Sensitivities of voting and SML for odd `M`, `M - 1` classifiers with
/// sensitivity `psi` and one with `psi1`:
///
/// `psi_vote = psi1 [1 - F(M/2 - 1)] + (1 - psi1) [1 - F(M/2)]` and
/// `psi_sml = psi1 [1 - F((M-1)/2 - theta/2)] + (1 - psi1) [1 - F((M-1)/2 + theta/2)]`
/// with `F = F(.; M - 1, psi)`.
pub fn lemma_voting_sml_sensitivities(
    m: usize,
    psi: f64,
    psi1: f64,
    convention: TieConvention,
) -> Result<LemmaSensitivities> {
    check_lemma_inputs(m, psi, psi1)?;
    let n = (m - 1) as u64;
    let half = m as f64 / 2.0;
    let psi_vote = psi1 * (1.0 - binomial_cdf(half - 1.0, n, psi)) + (1.0 - psi1) * (1.0 - binomial_cdf(half, n, psi));
    let theta = (2.0 * psi1 - 1.0) / (2.0 * psi - 1.0);
    let c = (m - 1) as f64 / 2.0;
    // When the first classifier is correct the others need X > c - theta/2,
    // otherwise X > c + theta/2.
    let (w_correct, w_wrong) = match convention {
        TieConvention::CoinFlip => (0.5, 0.5),
        // Approaching theta from below moves c - theta/2 down onto the integer
        // (tie lost) and c + theta/2 up onto it (tie won).
        TieConvention::LeftLimit => (0.0, 1.0),
    };
    let psi_sml = psi1 * upper_tail(c - theta / 2.0, n, psi, w_correct)
        + (1.0 - psi1) * upper_tail(c + theta / 2.0, n, psi, w_wrong);
    Ok(LemmaSensitivities {
        psi_vote,
        psi_sml,
        theta,
    })
}

/// Same quantities by summing over all `2^M` correct/incorrect patterns,
/// breaking exact ties with a fair coin.
pub fn lemma_brute_force(m: usize, psi: f64, psi1: f64) -> Result<LemmaSensitivities> {
    check_lemma_inputs(m, psi, psi1)?;
    if m > 20 {
        return Err(Error::GuardExceeded { limit: 20, actual: m });
    }
    let theta = (2.0 * psi1 - 1.0) / (2.0 * psi - 1.0);
    let scale = theta.abs() + (m - 1) as f64;
    let decide = |score: f64| -> f64 {
        if score.abs() <= TIE_TOL * scale {
            0.5
        } else if score > 0.0 {
            1.0
        } else {
            0.0
        }
    };
    let (mut vote, mut sml) = (0.0, 0.0);
    for pattern in 0u32..(1 << m) {
        let mut prob = 1.0;
        let mut others = 0.0;
        let first = if pattern & 1 == 1 { 1.0 } else { -1.0 };
        prob *= if first > 0.0 { psi1 } else { 1.0 - psi1 };
        for j in 1..m {
            let correct = pattern >> j & 1 == 1;
            prob *= if correct { psi } else { 1.0 - psi };
            others += if correct { 1.0 } else { -1.0 };
        }
        vote += prob * decide(first + others);
        sml += prob * decide(theta * first + others);
    }
    Ok(LemmaSensitivities {
        psi_vote: vote,
        psi_sml: sml,
        theta,
    })
}

/// Tail bound `exp(-2 eps^2 (M - 1))` with
/// `eps = (1 + (M-1)(2 psi - 1)^2) / (2 (M-1)(2 psi - 1))`.
pub fn hoeffding_gap_bound(m: usize, psi: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidEnsembleSize(m));
    }
    if !(psi > 0.5 && psi <= 1.0) {
        return Err(Error::InvalidHomogeneousAccuracy(psi));
    }
    let n = (m - 1) as f64;
    let d = 2.0 * psi - 1.0;
    let eps = (1.0 + n * d * d) / (2.0 * n * d);
    Ok((-2.0 * eps * eps * n).exp())
}
