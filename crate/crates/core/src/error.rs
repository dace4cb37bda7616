use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("label {0} is not -1 or +1")]
    InvalidLabel(i64),
    #[error("prediction matrix needs at least 2 instances and 2 classifiers, got {instances}x{classifiers}")]
    TooSmall { instances: usize, classifiers: usize },
    #[error("expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("classifier names must be unique; '{0}' repeats")]
    DuplicateName(String),
    #[error("ground truth contains a single class; sensitivity or specificity is undefined")]
    AllOneClass,
    #[error("need at least 2 instances to estimate a covariance, got {0}")]
    TooFewInstances(usize),
    #[error("classifier {0} has no significant covariance with any other classifier")]
    DisconnectedClassifier(usize),
    #[error("the log-linear normal equations are rank deficient")]
    SingularSystem,
    #[error("covariance summary is missing the entry variances or significance mask")]
    MissingSignificance,
    #[error("no convergence after {0} iterations")]
    NonConvergence(usize),
    #[error("exact enumeration is limited to {limit} classifiers, got {actual}")]
    GuardExceeded { limit: usize, actual: usize },
    #[error("class imbalance {b} leaves a class empty for {instances} instances")]
    InfeasibleImbalance { b: f64, instances: usize },
    #[error("balanced accuracy {pi} is unreachable with {positives} positives and {negatives} negatives")]
    InfeasibleTarget { pi: f64, positives: usize, negatives: usize },
    #[error("classifier {index}: {source}")]
    AtClassifier {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("homogeneous sensitivity must exceed 1/2, got {0}")]
    InvalidHomogeneousAccuracy(f64),
    #[error("ensemble size must be odd and at least 3, got {0}")]
    InvalidEnsembleSize(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty input")]
    EmptyInput,
    #[error("unknown {kind} '{name}'")]
    UnknownStrategy { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;
