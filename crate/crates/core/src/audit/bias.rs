use serde::{Deserialize, Serialize};

use super::{labeled, sub_seed};
use crate::error::{Error, Result};
use crate::ingestion::{AttributeDef, ExamRecord, Label};
use crate::metrics::{bootstrap_auc_ci, BootstrapSettings, ConfidenceInterval};

/// Bias-aligned exams are cancers carrying the high-prevalence value and
/// non-cancers carrying any other value; bias-conflicting exams are the
/// rest of the labeled exams.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasSubsets<'a> {
    pub aligned: Vec<&'a ExamRecord>,
    pub conflicting: Vec<&'a ExamRecord>,
}

pub fn bias_subsets<'a>(exams: &'a [ExamRecord], attr: &AttributeDef, high_value: &str) -> Result<BiasSubsets<'a>> {
    if !attr.has_value(high_value) {
        return Err(Error::InvalidParameter(format!(
            "`{high_value}` is not a value of attribute `{}`",
            attr.name
        )));
    }
    let mut aligned = Vec::new();
    let mut conflicting = Vec::new();
    for exam in labeled(exams) {
        let is_high = exam.attribute(&attr.name) == Some(high_value);
        if is_high == (exam.label == Label::Cancer) {
            aligned.push(exam);
        } else {
            conflicting.push(exam);
        }
    }
    Ok(BiasSubsets { aligned, conflicting })
}

/// A bootstrap estimate, or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Estimate {
    Defined(ConfidenceInterval),
    Undefined { reason: String },
}

impl Estimate {
    pub(crate) fn auc<'a>(exams: &[&'a ExamRecord], settings: &BootstrapSettings) -> Result<Self> {
        match bootstrap_auc_ci(exams, settings) {
            Ok(ci) => Ok(Estimate::Defined(ci)),
            Err(Error::Undefined(reason)) => Ok(Estimate::Undefined { reason }),
            Err(e) => Err(e),
        }
    }

    pub fn interval(&self) -> Option<&ConfidenceInterval> {
        match self {
            Estimate::Defined(ci) => Some(ci),
            Estimate::Undefined { .. } => None,
        }
    }

    pub fn point(&self) -> Option<f64> {
        self.interval().map(|ci| ci.point)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub positives: usize,
    pub negatives: usize,
}

impl ClassCounts {
    fn of(exams: &[&ExamRecord]) -> Self {
        let positives = exams.iter().filter(|e| e.label == Label::Cancer).count();
        ClassCounts {
            positives,
            negatives: exams.len() - positives,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasGapReport {
    pub attribute: String,
    pub high_value: String,
    pub aligned_auc: Estimate,
    pub conflicting_auc: Estimate,
    pub aligned_counts: ClassCounts,
    pub conflicting_counts: ClassCounts,
    /// Aligned point minus conflicting point, when both are defined.
    pub gap: Option<f64>,
}

/// AUC with bootstrap interval on the bias-aligned and bias-conflicting
/// subsets. A subset missing a class is reported as undefined.
pub fn bias_gap(
    exams: &[ExamRecord],
    attr: &AttributeDef,
    high_value: &str,
    settings: &BootstrapSettings,
) -> Result<BiasGapReport> {
    let subsets = bias_subsets(exams, attr, high_value)?;
    let with_seed = |k| BootstrapSettings {
        seed: sub_seed(settings.seed, k),
        ..settings.clone()
    };
    let aligned_auc = Estimate::auc(&subsets.aligned, &with_seed(1))?;
    let conflicting_auc = Estimate::auc(&subsets.conflicting, &with_seed(2))?;
    let gap = match (aligned_auc.point(), conflicting_auc.point()) {
        (Some(a), Some(c)) => Some(a - c),
        _ => None,
    };
    Ok(BiasGapReport {
        attribute: attr.name.clone(),
        high_value: high_value.to_string(),
        aligned_counts: ClassCounts::of(&subsets.aligned),
        conflicting_counts: ClassCounts::of(&subsets.conflicting),
        aligned_auc,
        conflicting_auc,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::tests_support::{exam, exams_with_counts};
    use proptest::prelude::*;

    fn attr() -> AttributeDef {
        AttributeDef::new("dataset", &["WUSTL", "OPTIMAM"])
    }

    #[test]
    fn one_of_each_cell() {
        let exams = vec![
            exam("wc".into(), "dataset", "WUSTL", 0.6, Label::Cancer),
            exam("oc".into(), "dataset", "OPTIMAM", 0.9, Label::Cancer),
            exam("wn".into(), "dataset", "WUSTL", 0.1, Label::NonCancer),
            exam("on".into(), "dataset", "OPTIMAM", 0.5, Label::NonCancer),
        ];
        let s = bias_subsets(&exams, &attr(), "OPTIMAM").unwrap();
        let ids = |v: &[&ExamRecord]| v.iter().map(|e| e.exam_id.clone()).collect::<Vec<_>>();
        // OPTIMAM cancers with WUSTL non-cancers
        assert_eq!(ids(&s.aligned), vec!["oc", "wn"]);
        assert_eq!(ids(&s.conflicting), vec!["wc", "on"]);
    }

    #[test]
    fn all_high_leaves_conflicting_without_positives() {
        let exams = exams_with_counts("dataset", &[("OPTIMAM", 5, 5)]);
        let report = bias_gap(&exams, &attr(), "OPTIMAM", &BootstrapSettings::new(50, 0)).unwrap();
        assert_eq!(report.conflicting_counts, ClassCounts { positives: 0, negatives: 5 });
        assert!(matches!(report.conflicting_auc, Estimate::Undefined { .. }));
        assert!(report.aligned_auc.point().is_none());
        assert_eq!(report.gap, None);
    }

    #[test]
    fn unknown_high_value_errors() {
        let exams = exams_with_counts("dataset", &[("OPTIMAM", 1, 1)]);
        assert!(bias_subsets(&exams, &attr(), "UCSF").is_err());
    }

    #[test]
    fn estimate_serializes_with_status_tag() {
        let e = Estimate::Undefined { reason: "empty".into() };
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["status"], "undefined");
        let back: Estimate = serde_json::from_value(json).unwrap();
        assert_eq!(back, e);
    }

    proptest! {
        #[test]
        fn subsets_partition_labeled_exams(cells in prop::collection::vec((any::<bool>(), 0u8..3, 0.0f64..1.0), 0..60)) {
            let exams: Vec<ExamRecord> = cells
                .iter()
                .enumerate()
                .map(|(i, &(high, label, s))| {
                    let label = [Label::Cancer, Label::NonCancer, Label::Unknown][label as usize];
                    exam(format!("e{i}"), "dataset", if high { "OPTIMAM" } else { "WUSTL" }, s, label)
                })
                .collect();
            let s = bias_subsets(&exams, &attr(), "OPTIMAM").unwrap();
            let labeled_n = exams.iter().filter(|e| e.label != Label::Unknown).count();
            prop_assert_eq!(s.aligned.len() + s.conflicting.len(), labeled_n);
            for a in &s.aligned {
                prop_assert!(!s.conflicting.iter().any(|c| std::ptr::eq(*a, *c)));
            }
        }
    }
}
