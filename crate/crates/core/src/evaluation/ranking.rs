use serde::Serialize;

use crate::error::{Error, Result};

/// Kendall's tau-a: (concordant - discordant) / (M (M - 1) / 2). Pairs tied
/// in either vector count as neither.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let m = a.len();
    if m < 2 {
        return Err(Error::InvalidParameter("kendall tau needs at least 2 entries".into()));
    }
    let mut score = 0i64;
    for i in 0..m {
        for j in i + 1..m {
            let s = (a[i] - a[j]).signum() * (b[i] - b[j]).signum();
            if a[i] != a[j] && b[i] != b[j] {
                score += s as i64;
            }
        }
    }
    Ok(score as f64 / (m * (m - 1) / 2) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingQuality {
    pub kendall_tau: f64,
    /// 1-based position of the truly best classifier in the estimated ranking.
    pub rank_of_best: usize,
    /// `(k, rank_of_best <= k)` for each requested k.
    pub top_k_hit: Vec<(usize, bool)>,
}

/// Compares an estimated ranking (0-based indices, best first) and its scores
/// against true accuracies.
pub fn ranking_quality(scores: &[f64], ranking: &[usize], truth: &[f64], ks: &[usize]) -> Result<RankingQuality> {
    if ranking.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: ranking.len(),
        });
    }
    let tau = kendall_tau(scores, truth)?;
    let mut best = 0;
    for (i, &t) in truth.iter().enumerate() {
        if t > truth[best] {
            best = i;
        }
    }
    let rank_of_best = ranking
        .iter()
        .position(|&i| i == best)
        .map(|p| p + 1)
        .ok_or_else(|| Error::InvalidParameter("ranking is not a permutation".into()))?;
    Ok(RankingQuality {
        kendall_tau: tau,
        rank_of_best,
        top_k_hit: ks.iter().map(|&k| (k, rank_of_best <= k)).collect(),
    })
}
