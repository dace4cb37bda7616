//! Unsupervised ranking and combination of binary classifiers from their
//! predictions on unlabeled data.
//!
//! Under conditional independence the off-diagonal covariance of the
//! predictions is rank one, with a leading eigenvector proportional to
//! `2 pi_i - 1`. [`spectral`] recovers that eigenvector, [`meta`] turns it
//! into labels, [`synthetic`] generates ensembles with known answers and
//! [`evaluation`] scores them.

pub mod covariance;
pub mod error;
pub mod evaluation;
pub mod flags;
pub mod meta;
pub mod model;
pub mod registry;
pub mod rng;
pub mod spectral;
pub mod synthetic;

pub use error::{Error, Result};
pub use flags::Warning;
pub use model::{
    class_imbalance, confusion_stats, CartelBlock, ClassifierPerformance, EnsembleSpec, LabelVector,
    PredictionMatrix, Provenance,
};
pub use registry::Registry;
