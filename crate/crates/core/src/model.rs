//! Domain types shared by every estimator: prediction matrices, label
//! vectors, per-classifier performance, and population descriptions.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_label(value: i8) -> Result<()> {
    match value {
        -1 | 1 => Ok(()),
        other => Err(Error::InvalidLabel(other as i64)),
    }
}

/// A vector of true (or estimated) class labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector(Vec<i8>);

impl LabelVector {
    pub fn new(labels: Vec<i8>) -> Result<Self> {
        labels.iter().try_for_each(|&l| check_label(l))?;
        Ok(Self(labels))
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.0.iter().filter(|&&l| l == 1).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }
}

/// S x M matrix of +/-1 predictions: rows are instances, columns classifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionMatrix {
    entries: Vec<i8>,
    instances: usize,
    classifiers: usize,
    names: Option<Vec<String>>,
}

impl PredictionMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(entries: Vec<i8>, instances: usize, classifiers: usize) -> Result<Self> {
        if instances < 2 || classifiers < 2 {
            return Err(Error::TooSmall {
                instances,
                classifiers,
            });
        }
        if entries.len() != instances * classifiers {
            return Err(Error::DimensionMismatch {
                expected: instances * classifiers,
                actual: entries.len(),
            });
        }
        entries.iter().try_for_each(|&l| check_label(l))?;
        Ok(Self {
            entries,
            instances,
            classifiers,
            names: None,
        })
    }

    /// Builds a matrix from one prediction vector per classifier.
    pub fn from_columns(columns: &[Vec<i8>]) -> Result<Self> {
        let classifiers = columns.len();
        let instances = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != instances) {
            return Err(Error::DimensionMismatch {
                expected: instances,
                actual: bad.len(),
            });
        }
        let mut entries = Vec::with_capacity(instances * classifiers);
        for k in 0..instances {
            entries.extend(columns.iter().map(|c| c[k]));
        }
        Self::from_row_major(entries, instances, classifiers)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.classifiers {
            return Err(Error::DimensionMismatch {
                expected: self.classifiers,
                actual: names.len(),
            });
        }
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::DuplicateName(dup.clone()));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn instances(&self) -> usize {
        self.instances
    }

    pub fn classifiers(&self) -> usize {
        self.classifiers
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    #[inline]
    pub fn get(&self, instance: usize, classifier: usize) -> i8 {
        self.entries[instance * self.classifiers + classifier]
    }

    pub fn row(&self, instance: usize) -> &[i8] {
        let start = instance * self.classifiers;
        &self.entries[start..start + self.classifiers]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i8]> {
        self.entries.chunks_exact(self.classifiers)
    }

    pub fn column(&self, classifier: usize) -> Vec<i8> {
        self.rows().map(|r| r[classifier]).collect()
    }

    pub fn as_row_major(&self) -> &[i8] {
        &self.entries
    }
}

/// Whether a performance record describes the population or a finite sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Population,
    Empirical,
}

/// Sensitivity and specificity of one classifier, with the derived
/// balanced accuracy and half-difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierPerformance {
    pub psi: f64,
    pub eta: f64,
    pub provenance: Provenance,
}

impl ClassifierPerformance {
    pub fn population(psi: f64, eta: f64) -> Result<Self> {
        Self::checked(psi, eta, Provenance::Population)
    }

    pub fn empirical(psi: f64, eta: f64) -> Result<Self> {
        Self::checked(psi, eta, Provenance::Empirical)
    }

    /// Population classifier with equal sensitivity and specificity.
    pub fn symmetric(pi: f64) -> Result<Self> {
        Self::population(pi, pi)
    }

    fn checked(psi: f64, eta: f64, provenance: Provenance) -> Result<Self> {
        for (name, v) in [("psi", psi), ("eta", eta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(Self {
            psi,
            eta,
            provenance,
        })
    }

    /// Balanced accuracy (psi + eta) / 2.
    pub fn pi(&self) -> f64 {
        (self.psi + self.eta) / 2.0
    }

    /// Half-difference (psi - eta) / 2.
    pub fn delta(&self) -> f64 {
        (self.psi - self.eta) / 2.0
    }

    /// Mean output E[f(X)] under class imbalance `b`.
    pub fn mu(&self, b: f64) -> f64 {
        2.0 * self.delta() + b * (2.0 * self.pi() - 1.0)
    }

    pub fn clamped(&self, eps: f64) -> Self {
        Self {
            psi: self.psi.clamp(eps, 1.0 - eps),
            eta: self.eta.clamp(eps, 1.0 - eps),
            provenance: self.provenance,
        }
    }
}

/// A sub-ensemble tracking a shared target labeling instead of the truth.
///
/// `target` is the target's performance against the truth; `members` are
/// each member's performance against the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartelBlock {
    pub target: ClassifierPerformance,
    pub members: Vec<ClassifierPerformance>,
}

impl CartelBlock {
    pub fn new(target: ClassifierPerformance, members: Vec<ClassifierPerformance>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("cartel needs at least one member".into()));
        }
        Ok(Self { target, members })
    }

    /// Cartel whose target and members all have sensitivity equal to specificity.
    pub fn symmetric(pi_c: f64, xi: &[f64]) -> Result<Self> {
        let members = xi
            .iter()
            .map(|&x| ClassifierPerformance::symmetric(x))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ClassifierPerformance::symmetric(pi_c)?, members)
    }

    pub fn pi_c(&self) -> f64 {
        self.target.pi()
    }

    /// Balanced accuracies of the members relative to the target.
    pub fn xi(&self) -> Vec<f64> {
        self.members.iter().map(ClassifierPerformance::pi).collect()
    }
}

/// Population description driving generators and analytic oracles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub class_imbalance: f64,
    pub honest: Vec<ClassifierPerformance>,
    pub cartel: Option<CartelBlock>,
}

impl EnsembleSpec {
    pub fn new(
        class_imbalance: f64,
        honest: Vec<ClassifierPerformance>,
        cartel: Option<CartelBlock>,
    ) -> Result<Self> {
        if !(class_imbalance > -1.0 && class_imbalance < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "class imbalance {class_imbalance} outside (-1, 1)"
            )));
        }
        if honest.is_empty() && cartel.is_none() {
            return Err(Error::InvalidParameter("ensemble has no classifiers".into()));
        }
        Ok(Self {
            class_imbalance,
            honest,
            cartel,
        })
    }

    pub fn classifier_count(&self) -> usize {
        self.honest.len() + self.cartel.as_ref().map_or(0, |c| c.members.len())
    }

    /// Population means of all classifiers, honest block first.
    pub fn means(&self) -> Vec<f64> {
        let b = self.class_imbalance;
        let mut out: Vec<f64> = self.honest.iter().map(|p| p.mu(b)).collect();
        if let Some(cartel) = &self.cartel {
            // Members see the target as their truth, with the target's own imbalance.
            let target_mean = cartel.target.mu(b);
            out.extend(cartel.members.iter().map(|p| p.mu(target_mean)));
        }
        out
    }
}

/// Empirical sensitivity and specificity of `predictions` against `truth`.
pub fn confusion_stats(predictions: &[i8], truth: &LabelVector) -> Result<ClassifierPerformance> {
    if predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: predictions.len(),
        });
    }
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in predictions.iter().zip(truth.as_slice()) {
        check_label(p)?;
        if t == 1 {
            pos += 1;
            tp += (p == 1) as usize;
        } else {
            neg += 1;
            tn += (p == -1) as usize;
        }
    }
    if pos == 0 || neg == 0 {
        return Err(Error::AllOneClass);
    }
    ClassifierPerformance::empirical(tp as f64 / pos as f64, tn as f64 / neg as f64)
}

/// Empirical class imbalance (P - N) / S.
pub fn class_imbalance(truth: &LabelVector) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let p = truth.positives() as f64;
    let n = truth.negatives() as f64;
    (p - n) / truth.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[i8]) -> LabelVector {
        LabelVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn perfect_and_inverted_predictions() {
        let truth = labels(&[1, -1, 1, -1, -1]);
        let perf = confusion_stats(truth.as_slice(), &truth).unwrap();
        assert_eq!((perf.psi, perf.eta, perf.pi()), (1.0, 1.0, 1.0));
        let inverted: Vec<i8> = truth.as_slice().iter().map(|l| -l).collect();
        let perf = confusion_stats(&inverted, &truth).unwrap();
        assert_eq!((perf.psi, perf.eta, perf.pi()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn hand_counted_confusion() {
        let truth = labels(&[1, 1, -1, -1]);
        let perf = confusion_stats(&[1, -1, -1, 1], &truth).unwrap();
        assert_eq!(perf.psi, 0.5);
        assert_eq!(perf.eta, 0.5);
        assert_eq!(perf.pi(), 0.5);
        assert_eq!(perf.delta(), 0.0);
        assert_eq!(perf.provenance, Provenance::Empirical);
    }

    #[test]
    fn single_class_truth_is_rejected() {
        let truth = labels(&[1, 1, 1]);
        assert_eq!(confusion_stats(&[1, -1, 1], &truth), Err(Error::AllOneClass));
    }

    #[test]
    fn imbalance_counts() {
        let mut v = vec![1i8; 300];
        v.extend(vec![-1i8; 300]);
        assert_eq!(class_imbalance(&labels(&v)), 0.0);
        assert_eq!(class_imbalance(&labels(&[1, 1, 1])), 1.0);
        assert_eq!(class_imbalance(&labels(&[1, -1, -1, -1])), -0.5);
    }

    #[test]
    fn zero_is_not_a_label() {
        assert_eq!(LabelVector::new(vec![1, 0]), Err(Error::InvalidLabel(0)));
        assert!(PredictionMatrix::from_row_major(vec![1, 0, 1, 1], 2, 2).is_err());
    }

    #[test]
    fn matrix_shape_rules() {
        assert!(matches!(
            PredictionMatrix::from_row_major(vec![1, 1], 1, 2),
            Err(Error::TooSmall { .. })
        ));
        let m = PredictionMatrix::from_columns(&[vec![1, -1, 1], vec![-1, -1, 1]]).unwrap();
        assert_eq!(m.instances(), 3);
        assert_eq!(m.row(0), &[1, -1]);
        assert_eq!(m.column(1), vec![-1, -1, 1]);
        assert!(matches!(
            m.clone().with_names(vec!["a".into(), "a".into()]),
            Err(Error::DuplicateName(_))
        ));
        assert!(m.with_names(vec!["a".into(), "b".into()]).is_ok());
    }

    #[test]
    fn mean_formula() {
        let p = ClassifierPerformance::population(0.8, 0.6).unwrap();
        assert!((p.mu(0.2) - 0.28).abs() < 1e-15);
        assert!(ClassifierPerformance::population(1.2, 0.5).is_err());
    }

    #[test]
    fn spec_requires_interior_imbalance() {
        let h = vec![ClassifierPerformance::symmetric(0.7).unwrap()];
        assert!(EnsembleSpec::new(1.0, h.clone(), None).is_err());
        assert!(EnsembleSpec::new(0.0, vec![], None).is_err());
        assert!(EnsembleSpec::new(-0.3, h, None).is_ok());
    }
}
