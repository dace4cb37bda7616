use serde::Serialize;

/// Non-fatal conditions surfaced alongside a result.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Eigenvector entries sum to exactly zero; the sign was left as computed.
    ExactBalance,
    /// An iterative solver stopped at its iteration cap.
    NonConvergence { iterations: usize },
    /// Power iteration failed and a full decomposition was used instead.
    EigenFallback,
    /// Diagonal entry estimated from fewer than three masked pairs.
    LowConfidence { classifier: usize, pairs: usize },
    /// Classifier had no usable pair; its diagonal entry was set to zero.
    ExcludedClassifier { classifier: usize },
    /// EM labels collapsed to one class; the missing rate kept its previous value.
    DegenerateLabels { iteration: usize },
    /// An arctan denominator vanished and the limiting angle was used.
    DegenerateDenominator { angle: &'static str },
}
