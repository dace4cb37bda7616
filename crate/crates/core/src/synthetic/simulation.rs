//! One simulated scenario: a pool of labeled instances, RDFBA classifiers
//! targeted on the pool, and a class-stratified test subsample.

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::Serialize;

use super::generators::{cartel_columns, generate_truth, independent_columns, Targeting};
use crate::error::{Error, Result};
use crate::model::{confusion_stats, ClassifierPerformance, LabelVector, PredictionMatrix};
use crate::rng::child_rng;

/// Pool size used when classifiers are targeted on a larger set than the
/// test subsample.
pub const DEFAULT_POOL: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CartelConfig {
    /// Fraction of the ensemble in the cartel.
    pub fraction: f64,
    pub pi_c: f64,
    pub xi: f64,
}

impl CartelConfig {
    pub fn members(&self, classifiers: usize) -> usize {
        (self.fraction * classifiers as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub classifiers: usize,
    pub instances: usize,
    pub class_imbalance: f64,
    pub pi_min: f64,
    pub pi_max: f64,
    pub cartel: Option<CartelConfig>,
    /// Pool size; `None` targets the balanced accuracies on the test set itself.
    pub pool: Option<usize>,
    pub targeting: Targeting,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            classifiers: 100,
            instances: 600,
            class_imbalance: 0.0,
            pi_min: 0.3,
            pi_max: 0.8,
            cartel: None,
            pool: Some(DEFAULT_POOL),
            targeting: Targeting::Nearest,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(0.0..=1.0).contains(&self.pi_min) || !(0.0..=1.0).contains(&self.pi_max) || self.pi_min > self.pi_max {
            return bad(format!("pi range [{}, {}] not inside [0, 1]", self.pi_min, self.pi_max));
        }
        if let Some(c) = &self.cartel {
            if !(0.0..1.0).contains(&c.fraction) {
                return bad(format!("cartel fraction {} outside [0, 1)", c.fraction));
            }
            for (name, v) in [("pi_c", c.pi_c), ("xi", c.xi)] {
                if !(0.0..=1.0).contains(&v) {
                    return bad(format!("{name} = {v} outside [0, 1]"));
                }
            }
        }
        if let Some(pool) = self.pool {
            if pool < self.instances {
                return bad(format!("pool {pool} smaller than test set {}", self.instances));
            }
        }
        if self.classifiers < 2 {
            return Err(Error::TooSmall {
                instances: self.instances,
                classifiers: self.classifiers,
            });
        }
        Ok(())
    }

    pub fn cartel_size(&self) -> usize {
        self.cartel.as_ref().map_or(0, |c| c.members(self.classifiers))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simulation {
    #[serde(skip)]
    pub predictions: PredictionMatrix,
    pub truth: LabelVector,
    /// Balanced accuracies requested for each column (after grid matching),
    /// measured on the pool. Cartel columns hold xi relative to the target.
    pub targets: Vec<f64>,
    /// Performance of each column against the truth on the test set.
    pub realized: Vec<ClassifierPerformance>,
    /// Indices of cartel members (always the trailing columns).
    pub cartel_members: Vec<usize>,
    pub cartel_target: Option<LabelVector>,
    /// Cartel target performance against the truth on the test set.
    pub cartel_target_performance: Option<ClassifierPerformance>,
}

impl Simulation {
    /// Column with the highest realized balanced accuracy, lowest index on ties.
    pub fn best_classifier(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.realized.iter().enumerate() {
            if p.pi() > self.realized[best].pi() {
                best = i;
            }
        }
        best
    }

    pub fn realized_pis(&self) -> Vec<f64> {
        self.realized.iter().map(ClassifierPerformance::pi).collect()
    }
}

// Stream indices for child generators.
const STREAM_TRUTH: u64 = 0;
const STREAM_PIS: u64 = 1;
const STREAM_COLUMNS: u64 = 2;
const STREAM_SUBSAMPLE: u64 = 3;

fn subsample(truth: &LabelVector, instances: usize, b: f64, seed: u64) -> Result<Vec<usize>> {
    let positives = (instances as f64 * (1.0 + b) / 2.0).round() as usize;
    if positives == 0 || positives >= instances {
        return Err(Error::InfeasibleImbalance { b, instances });
    }
    let pos: Vec<usize> = (0..truth.len()).filter(|&k| truth.as_slice()[k] == 1).collect();
    let neg: Vec<usize> = (0..truth.len()).filter(|&k| truth.as_slice()[k] == -1).collect();
    let negatives = instances - positives;
    if positives > pos.len() || negatives > neg.len() {
        return Err(Error::InfeasibleImbalance { b, instances });
    }
    let mut rng = child_rng(seed, STREAM_SUBSAMPLE);
    let mut rows: Vec<usize> = index::sample(&mut rng, pos.len(), positives)
        .into_iter()
        .map(|k| pos[k])
        .chain(index::sample(&mut rng, neg.len(), negatives).into_iter().map(|k| neg[k]))
        .collect();
    rows.shuffle(&mut rng);
    Ok(rows)
}

/// Generates one scenario. Every random choice is drawn from a child stream
/// of `seed`, so equal seeds give equal scenarios.
pub fn simulate(config: &SimulationConfig, seed: u64) -> Result<Simulation> {
    config.validate()?;
    let b = config.class_imbalance;
    let pool_size = config.pool.unwrap_or(config.instances);
    let pool_truth = generate_truth(pool_size, b, &mut child_rng(seed, STREAM_TRUTH))?;

    let n_cartel = config.cartel_size();
    let n_honest = config.classifiers - n_cartel;
    let mut pis_rng = child_rng(seed, STREAM_PIS);
    let honest_pis: Vec<f64> = (0..n_honest)
        .map(|_| {
            if config.pi_min == config.pi_max {
                config.pi_min
            } else {
                pis_rng.gen_range(config.pi_min..config.pi_max)
            }
        })
        .collect();

    let mut col_rng = child_rng(seed, STREAM_COLUMNS);
    let (columns, targets, target) = match &config.cartel {
        Some(c) if n_cartel > 0 => {
            let xi = vec![c.xi; n_cartel];
            let out = cartel_columns(&pool_truth, &honest_pis, c.pi_c, &xi, config.targeting, &mut col_rng)?;
            let mut columns = out.honest.columns;
            columns.extend(out.members.columns);
            let mut targets = out.honest.targets;
            targets.extend(out.members.targets);
            (columns, targets, Some(out.target))
        }
        _ => {
            let out = independent_columns(&pool_truth, &honest_pis, config.targeting, &mut col_rng)?;
            (out.columns, out.targets, None)
        }
    };

    let rows = if config.pool.is_some() {
        subsample(&pool_truth, config.instances, b, seed)?
    } else {
        (0..pool_size).collect()
    };
    let truth = LabelVector::new(rows.iter().map(|&k| pool_truth.as_slice()[k]).collect())?;
    let test_columns: Vec<Vec<i8>> = columns
        .iter()
        .map(|col| rows.iter().map(|&k| col[k]).collect())
        .collect();
    let realized = test_columns
        .iter()
        .map(|col| confusion_stats(col, &truth))
        .collect::<Result<Vec<_>>>()?;
    let cartel_target = target
        .map(|t| LabelVector::new(rows.iter().map(|&k| t.as_slice()[k]).collect()))
        .transpose()?;
    let cartel_target_performance = cartel_target
        .as_ref()
        .map(|t| confusion_stats(t.as_slice(), &truth))
        .transpose()?;
    Ok(Simulation {
        predictions: PredictionMatrix::from_columns(&test_columns)?,
        truth,
        targets,
        realized,
        cartel_members: (n_honest..config.classifiers).collect(),
        cartel_target,
        cartel_target_performance,
    })
}
