//! Meta-learners behind one trait, registered under the names used on the
//! command line: `vote`, `sml`, `mle`, `imle-sml`, `imle-vote`.

use std::sync::OnceLock;

use super::em::{imle, EmOptions, EmState};
use super::mle::{mle_predict, mle_weights};
use super::{majority_vote, sml_predict, MetaPrediction};
use crate::error::{Error, Result};
use crate::model::{confusion_stats, LabelVector, PredictionMatrix};
use crate::registry::Registry;
use crate::spectral::{rank_classifiers_by_name, RankOneEstimate, RecoveryOptions};

/// Inputs shared by all meta-learners for one prediction matrix.
pub struct MetaContext<'a> {
    pub predictions: &'a PredictionMatrix,
    pub seed: u64,
    /// Registry key of the recovery method used for SML weights.
    pub recovery: String,
    pub recovery_options: RecoveryOptions,
    pub em: EmOptions,
    /// Ground truth, needed only by the oracle `mle` learner.
    pub truth: Option<&'a LabelVector>,
    spectral: OnceLock<Result<RankOneEstimate>>,
}

impl<'a> MetaContext<'a> {
    pub fn new(predictions: &'a PredictionMatrix, seed: u64) -> Self {
        Self {
            predictions,
            seed,
            recovery: "linear".into(),
            recovery_options: RecoveryOptions::default(),
            em: EmOptions::default(),
            truth: None,
            spectral: OnceLock::new(),
        }
    }

    pub fn with_recovery(mut self, key: impl Into<String>, options: RecoveryOptions) -> Self {
        self.recovery = key.into();
        self.recovery_options = options;
        self
    }

    pub fn with_em(mut self, em: EmOptions) -> Self {
        self.em = em;
        self
    }

    pub fn with_truth(mut self, truth: &'a LabelVector) -> Self {
        self.truth = Some(truth);
        self
    }

    /// Spectral estimate, computed once per context.
    pub fn spectral(&self) -> Result<&RankOneEstimate> {
        self.spectral
            .get_or_init(|| rank_classifiers_by_name(self.predictions, &self.recovery, &self.recovery_options))
            .as_ref()
            .map_err(Clone::clone)
    }
}

#[derive(Debug, Clone)]
pub struct MetaOutcome {
    pub prediction: MetaPrediction,
    pub em: Option<EmState>,
}

pub trait MetaLearner: Send + Sync {
    fn name(&self) -> &'static str;
    fn predict(&self, ctx: &MetaContext<'_>) -> Result<MetaOutcome>;
}

pub struct Vote;

impl MetaLearner for Vote {
    fn name(&self) -> &'static str {
        "vote"
    }

    fn predict(&self, ctx: &MetaContext<'_>) -> Result<MetaOutcome> {
        Ok(MetaOutcome {
            prediction: majority_vote(ctx.predictions, ctx.seed),
            em: None,
        })
    }
}

pub struct Sml;

impl MetaLearner for Sml {
    fn name(&self) -> &'static str {
        "sml"
    }

    fn predict(&self, ctx: &MetaContext<'_>) -> Result<MetaOutcome> {
        let estimate = ctx.spectral()?;
        Ok(MetaOutcome {
            prediction: sml_predict(ctx.predictions, &estimate.v_hat, ctx.seed),
            em: None,
        })
    }
}

/// Maximum-likelihood labels with (psi, eta) measured against the truth.
pub struct OracleMle;

impl MetaLearner for OracleMle {
    fn name(&self) -> &'static str {
        "mle"
    }

    fn predict(&self, ctx: &MetaContext<'_>) -> Result<MetaOutcome> {
        let truth = ctx
            .truth
            .ok_or_else(|| Error::InvalidParameter("mle needs ground-truth labels".into()))?;
        let perfs = (0..ctx.predictions.classifiers())
            .map(|i| confusion_stats(&ctx.predictions.column(i), truth))
            .collect::<Result<Vec<_>>>()?;
        let weights = mle_weights(&perfs, ctx.em.clamp);
        Ok(MetaOutcome {
            prediction: mle_predict(ctx.predictions, &weights, ctx.seed),
            em: None,
        })
    }
}

/// EM refinement started from another learner's labels.
pub struct Refined<L> {
    pub name: &'static str,
    pub start: L,
}

impl<L: MetaLearner> MetaLearner for Refined<L> {
    fn name(&self) -> &'static str {
        self.name
    }

    fn predict(&self, ctx: &MetaContext<'_>) -> Result<MetaOutcome> {
        let start = self.start.predict(ctx)?.prediction;
        let state = imle(ctx.predictions, &start.labels, &ctx.em)?;
        let weights = mle_weights(&state.performances, ctx.em.clamp);
        Ok(MetaOutcome {
            prediction: MetaPrediction {
                labels: state.labels.clone(),
                method: self.name.into(),
                weights: Some(weights.log_alpha),
                tie_count: 0,
                rng_seed: start.rng_seed,
            },
            em: Some(state),
        })
    }
}

pub fn default_meta_learners() -> Registry<dyn MetaLearner> {
    let mut reg: Registry<dyn MetaLearner> = Registry::new("meta-learner");
    let all: [Box<dyn MetaLearner>; 5] = [
        Box::new(Vote),
        Box::new(Sml),
        Box::new(OracleMle),
        Box::new(Refined {
            name: "imle-sml",
            start: Sml,
        }),
        Box::new(Refined {
            name: "imle-vote",
            start: Vote,
        }),
    ];
    for learner in all {
        reg.register(learner.name(), learner);
    }
    reg
}
