//! Label-level generators: ground truths, random detectors with a fixed
//! empirical balanced accuracy (RDFBA), independent ensembles, cartels, and
//! a Bernoulli sampler for population specs.

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{confusion_stats, ClassifierPerformance, EnsembleSpec, LabelVector, PredictionMatrix};
use crate::rng::Rng;

/// Redraws allowed when a cartel target comes out single-class.
const TARGET_REDRAWS: usize = 100;

/// Exactly `round(S (1 + b) / 2)` positives at uniformly random positions.
pub fn generate_truth(instances: usize, b: f64, rng: &mut Rng) -> Result<LabelVector> {
    let positives = (instances as f64 * (1.0 + b) / 2.0).round() as usize;
    if !(-1.0..=1.0).contains(&b) || positives == 0 || positives >= instances {
        return Err(Error::InfeasibleImbalance { b, instances });
    }
    let mut labels = vec![-1i8; instances];
    labels[..positives].fill(1);
    labels.shuffle(rng);
    LabelVector::new(labels)
}

/// How a requested balanced accuracy is matched to the integer grid of
/// reachable (FP, FN) counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Targeting {
    /// The requested value must be reachable.
    Exact,
    /// Use the nearest reachable value.
    #[default]
    Nearest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    pub predictions: Vec<i8>,
    pub performance: ClassifierPerformance,
    pub false_positives: usize,
    pub false_negatives: usize,
}

fn integral_false_negatives(pi: f64, fp: usize, positives: usize, negatives: usize) -> Option<usize> {
    let p = positives as f64;
    let fn_real = (2.0 - 2.0 * pi - fp as f64 / negatives as f64) * p;
    let rounded = fn_real.round();
    let feasible = (fn_real - rounded).abs() <= 1e-9 * p.max(1.0) && rounded >= 0.0 && rounded <= p;
    feasible.then_some(rounded as usize)
}

/// All (FP, FN) pairs reaching balanced accuracy `pi` exactly.
pub fn feasible_errors(pi: f64, positives: usize, negatives: usize) -> Vec<(usize, usize)> {
    if positives == 0 || negatives == 0 {
        return Vec::new();
    }
    (0..=negatives)
        .filter_map(|fp| integral_false_negatives(pi, fp, positives, negatives).map(|fn_| (fp, fn_)))
        .collect()
}

/// Reachable balanced accuracy closest to `pi`; the lowest FP wins ties.
pub fn nearest_feasible_pi(pi: f64, positives: usize, negatives: usize) -> Result<f64> {
    if positives == 0 || negatives == 0 {
        return Err(Error::InfeasibleTarget {
            pi,
            positives,
            negatives,
        });
    }
    let (p, n) = (positives as f64, negatives as f64);
    let mut best = (f64::INFINITY, 0.0);
    for fp in 0..=negatives {
        let fn_ = ((2.0 - 2.0 * pi - fp as f64 / n) * p).round().clamp(0.0, p);
        let reached = ((p - fn_) / p + (n - fp as f64) / n) / 2.0;
        let gap = (reached - pi).abs();
        if gap < best.0 {
            best = (gap, reached);
        }
    }
    Ok(best.1)
}

/// Random detector whose empirical balanced accuracy on `truth` is `pi`.
///
/// Picks FP uniformly among all counts for which the matching FN is an
/// integer in `[0, P]`, then flips FP random negatives and FN random positives.
pub fn rdfba(truth: &LabelVector, pi: f64, rng: &mut Rng) -> Result<Detector> {
    let positives: Vec<usize> = (0..truth.len()).filter(|&k| truth.as_slice()[k] == 1).collect();
    let negatives: Vec<usize> = (0..truth.len()).filter(|&k| truth.as_slice()[k] == -1).collect();
    let feasible = feasible_errors(pi, positives.len(), negatives.len());
    if feasible.is_empty() {
        return Err(Error::InfeasibleTarget {
            pi,
            positives: positives.len(),
            negatives: negatives.len(),
        });
    }
    let (fp, fn_) = feasible[rng.gen_range(0..feasible.len())];
    let mut predictions = truth.as_slice().to_vec();
    for k in index::sample(rng, negatives.len(), fp) {
        predictions[negatives[k]] = 1;
    }
    for k in index::sample(rng, positives.len(), fn_) {
        predictions[positives[k]] = -1;
    }
    let performance = confusion_stats(&predictions, truth)?;
    Ok(Detector {
        predictions,
        performance,
        false_positives: fp,
        false_negatives: fn_,
    })
}

fn resolve_target(pi: f64, truth: &LabelVector, targeting: Targeting) -> Result<f64> {
    match targeting {
        Targeting::Exact => Ok(pi),
        Targeting::Nearest => nearest_feasible_pi(pi, truth.positives(), truth.negatives()),
    }
}

/// Prediction columns with their realized performance against the labels
/// they were generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct Columns {
    pub columns: Vec<Vec<i8>>,
    /// Balanced accuracies actually targeted after grid matching.
    pub targets: Vec<f64>,
    pub performances: Vec<ClassifierPerformance>,
}

impl Columns {
    pub fn to_matrix(&self) -> Result<PredictionMatrix> {
        PredictionMatrix::from_columns(&self.columns)
    }
}

/// One independent RDFBA column per requested balanced accuracy.
pub fn independent_columns(truth: &LabelVector, pis: &[f64], targeting: Targeting, rng: &mut Rng) -> Result<Columns> {
    let mut out = Columns {
        columns: Vec::with_capacity(pis.len()),
        targets: Vec::with_capacity(pis.len()),
        performances: Vec::with_capacity(pis.len()),
    };
    for (index, &pi) in pis.iter().enumerate() {
        let wrap = |e: Error| Error::AtClassifier {
            index,
            source: Box::new(e),
        };
        let target = resolve_target(pi, truth, targeting).map_err(wrap)?;
        let det = rdfba(truth, target, rng).map_err(wrap)?;
        out.columns.push(det.predictions);
        out.targets.push(target);
        out.performances.push(det.performance);
    }
    Ok(out)
}

pub fn independent_ensemble(
    truth: &LabelVector,
    pis: &[f64],
    targeting: Targeting,
    rng: &mut Rng,
) -> Result<PredictionMatrix> {
    independent_columns(truth, pis, targeting, rng)?.to_matrix()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartelColumns {
    pub honest: Columns,
    /// Members, with performances measured against `target`.
    pub members: Columns,
    pub target: LabelVector,
    pub target_performance: ClassifierPerformance,
}

impl CartelColumns {
    /// Honest block first, then cartel members.
    pub fn to_matrix(&self) -> Result<PredictionMatrix> {
        let cols: Vec<Vec<i8>> = self
            .honest
            .columns
            .iter()
            .chain(&self.members.columns)
            .cloned()
            .collect();
        PredictionMatrix::from_columns(&cols)
    }
}

/// Honest RDFBA columns plus a cartel tracking its own target labeling.
///
/// The target is an RDFBA of the truth at `pi_c`, redrawn if it comes out
/// single-class; each member is an RDFBA of the target at its `xi`.
pub fn cartel_columns(
    truth: &LabelVector,
    honest_pis: &[f64],
    pi_c: f64,
    xi: &[f64],
    targeting: Targeting,
    rng: &mut Rng,
) -> Result<CartelColumns> {
    let honest = independent_columns(truth, honest_pis, targeting, rng)?;
    let target_pi = resolve_target(pi_c, truth, targeting)?;
    let mut target = None;
    for _ in 0..TARGET_REDRAWS {
        let det = rdfba(truth, target_pi, rng)?;
        let labels = LabelVector::new(det.predictions)?;
        if labels.positives() > 0 && labels.negatives() > 0 {
            target = Some((labels, det.performance));
            break;
        }
    }
    let (target, target_performance) = target.ok_or(Error::InfeasibleTarget {
        pi: pi_c,
        positives: truth.positives(),
        negatives: truth.negatives(),
    })?;
    let members = if xi.is_empty() {
        Columns {
            columns: Vec::new(),
            targets: Vec::new(),
            performances: Vec::new(),
        }
    } else {
        independent_columns(&target, xi, targeting, rng).map_err(|e| match e {
            Error::AtClassifier { index, source } => Error::AtClassifier {
                index: index + honest_pis.len(),
                source,
            },
            other => other,
        })?
    };
    Ok(CartelColumns {
        honest,
        members,
        target,
        target_performance,
    })
}

pub fn cartel_ensemble(
    truth: &LabelVector,
    honest_pis: &[f64],
    pi_c: f64,
    xi: &[f64],
    targeting: Targeting,
    rng: &mut Rng,
) -> Result<(PredictionMatrix, LabelVector)> {
    let c = cartel_columns(truth, honest_pis, pi_c, xi, targeting, rng)?;
    Ok((c.to_matrix()?, c.target))
}

/// Draws `instances` i.i.d. samples from the population described by `spec`:
/// the class with Pr[+1] = (1 + b)/2, each honest output independently given
/// the class, and cartel outputs independently given the cartel target.
pub fn sample_population(spec: &EnsembleSpec, instances: usize, rng: &mut Rng) -> Result<(PredictionMatrix, LabelVector)> {
    let m = spec.classifier_count();
    let mut entries = Vec::with_capacity(instances * m);
    let mut truth = Vec::with_capacity(instances);
    let p_pos = (1.0 + spec.class_imbalance) / 2.0;
    let emit = |perf: &ClassifierPerformance, y: i8, rng: &mut Rng| -> i8 {
        let correct = if y == 1 { rng.gen_bool(perf.psi) } else { rng.gen_bool(perf.eta) };
        if correct {
            y
        } else {
            -y
        }
    };
    for _ in 0..instances {
        let y: i8 = if rng.gen_bool(p_pos) { 1 } else { -1 };
        truth.push(y);
        for perf in &spec.honest {
            entries.push(emit(perf, y, rng));
        }
        if let Some(cartel) = &spec.cartel {
            let t = emit(&cartel.target, y, rng);
            for perf in &cartel.members {
                entries.push(emit(perf, t, rng));
            }
        }
    }
    Ok((
        PredictionMatrix::from_row_major(entries, instances, m)?,
        LabelVector::new(truth)?,
    ))
}
