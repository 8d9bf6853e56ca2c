use serde::{Deserialize, Serialize};

use super::labeled;
use crate::ingestion::{AttributeDef, ExamRecord, Label};
use crate::metrics::{ks_statistic, quartiles, Quartiles};

/// Score summary of one (value, class) cell. Statistics are absent when the
/// cell is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub count: usize,
    pub quartiles: Option<Quartiles>,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl ClassSummary {
    fn of(scores: &[f64]) -> Self {
        let n = scores.len();
        ClassSummary {
            count: n,
            quartiles: quartiles(scores).ok(),
            mean: (n > 0).then(|| scores.iter().sum::<f64>() / n as f64),
            min: scores.iter().copied().reduce(f64::min),
            max: scores.iter().copied().reduce(f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueDistribution {
    pub value: String,
    pub positives: ClassSummary,
    pub negatives: ClassSummary,
}

/// KS distance between two values' score distributions, per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseKs {
    pub value_a: String,
    pub value_b: String,
    pub positives: Option<f64>,
    pub negatives: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionComparison {
    pub attribute: String,
    pub values: Vec<ValueDistribution>,
    pub ks: Vec<PairwiseKs>,
}

pub fn distribution_comparison(exams: &[ExamRecord], attr: &AttributeDef) -> DistributionComparison {
    let mut pos: Vec<Vec<f64>> = vec![Vec::new(); attr.values.len()];
    let mut neg: Vec<Vec<f64>> = vec![Vec::new(); attr.values.len()];
    for exam in labeled(exams) {
        let Some(i) = exam.attribute(&attr.name).and_then(|v| attr.values.iter().position(|d| d == v)) else {
            continue;
        };
        if exam.label == Label::Cancer {
            pos[i].push(exam.score);
        } else {
            neg[i].push(exam.score);
        }
    }

    let values = attr
        .values
        .iter()
        .enumerate()
        .map(|(i, value)| ValueDistribution {
            value: value.clone(),
            positives: ClassSummary::of(&pos[i]),
            negatives: ClassSummary::of(&neg[i]),
        })
        .collect();

    let mut ks = Vec::new();
    for i in 0..attr.values.len() {
        for j in i + 1..attr.values.len() {
            ks.push(PairwiseKs {
                value_a: attr.values[i].clone(),
                value_b: attr.values[j].clone(),
                positives: ks_statistic(&pos[i], &pos[j]).ok(),
                negatives: ks_statistic(&neg[i], &neg[j]).ok(),
            });
        }
    }
    DistributionComparison {
        attribute: attr.name.clone(),
        values,
        ks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::tests_support::{exam, exams_with_counts};

    #[test]
    fn identical_groups_have_zero_ks() {
        let exams = exams_with_counts("scanner", &[("HS", 8, 30), ("SD", 8, 30)]);
        let d = distribution_comparison(&exams, &AttributeDef::new("scanner", &["HS", "SD"]));
        assert_eq!(d.ks.len(), 1);
        assert_eq!(d.ks[0].positives, Some(0.0));
        assert_eq!(d.ks[0].negatives, Some(0.0));
        for v in &d.values {
            let q = v.negatives.quartiles.unwrap();
            assert!(q.q1 <= q.median && q.median <= q.q3);
        }
    }

    #[test]
    fn shifted_disjoint_group_has_unit_ks() {
        let mut exams = Vec::new();
        for i in 0..20 {
            let s = i as f64 / 200.0;
            exams.push(exam(format!("a{i}"), "x", "A", s, Label::NonCancer));
            exams.push(exam(format!("b{i}"), "x", "B", s + 0.1, Label::NonCancer));
        }
        let d = distribution_comparison(&exams, &AttributeDef::new("x", &["A", "B", "C"]));
        assert_eq!(d.ks[0].negatives, Some(1.0));
        assert_eq!(d.ks[0].positives, None);
        // pairs with the empty value C are absent, not zero
        assert_eq!(d.ks.len(), 3);
        assert_eq!(d.ks[1].negatives, None);
        assert_eq!(d.values[2].negatives.count, 0);
        assert!(d.values[2].negatives.quartiles.is_none());
    }
}
