//! AUC as the attribute mix of the evaluation set moves from all "rest"
//! (fraction 0) to all high-value exams (fraction 1).
//!
//! The evaluation size N is the number of labeled exams carrying the
//! attribute. At fraction f, ⌈f·N⌉ exams come from the high value and the
//! remainder from all other values; each side is resampled with
//! replacement class by class so it keeps its own prevalence.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::labeled;
use crate::error::{Error, Result};
use crate::ingestion::{AttributeDef, ExamRecord, Label};
use crate::metrics::{auc, mean_std};
use crate::rng::{stream_id, stream_rng, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionPoint {
    pub fraction: f64,
    pub n_high: usize,
    pub n_rest: usize,
    /// Subsets on which the AUC was defined.
    pub defined_subsets: usize,
    pub mean_auc: Option<f64>,
    pub std_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionCurve {
    pub attribute: String,
    pub high_value: String,
    pub evaluation_size: usize,
    pub subsets_per_point: usize,
    pub points: Vec<CompositionPoint>,
}

impl CompositionCurve {
    pub fn point_at(&self, fraction: f64) -> Option<&CompositionPoint> {
        self.points.iter().find(|p| p.fraction == fraction)
    }
}

/// Exams of one side split by class.
struct Side {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl Side {
    fn len(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    /// Appends `n` draws keeping this side's prevalence; `false` if the side
    /// is empty but draws were requested.
    fn draw(&self, n: usize, rng: &mut StreamRng, pos: &mut Vec<f64>, neg: &mut Vec<f64>) -> bool {
        if n == 0 {
            return true;
        }
        if self.len() == 0 {
            return false;
        }
        let n_pos = (self.pos.len() as f64 / self.len() as f64 * n as f64).round() as usize;
        for _ in 0..n_pos {
            pos.push(self.pos[rng.random_range(0..self.pos.len())]);
        }
        for _ in 0..n - n_pos {
            neg.push(self.neg[rng.random_range(0..self.neg.len())]);
        }
        true
    }
}

pub fn composition_sweep(
    exams: &[ExamRecord],
    attr: &AttributeDef,
    high_value: &str,
    fractions: &[f64],
    subsets_per_point: usize,
    seed: u64,
) -> Result<CompositionCurve> {
    if !attr.has_value(high_value) {
        return Err(Error::InvalidParameter(format!(
            "`{high_value}` is not a value of attribute `{}`",
            attr.name
        )));
    }
    if subsets_per_point == 0 {
        return Err(Error::InvalidParameter("subsets_per_point must be at least 1".into()));
    }
    if let Some(f) = fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(Error::InvalidParameter(format!("fraction {f} must be in [0, 1]")));
    }

    let mut high = Side { pos: Vec::new(), neg: Vec::new() };
    let mut rest = Side { pos: Vec::new(), neg: Vec::new() };
    for exam in labeled(exams) {
        let Some(value) = exam.attribute(&attr.name) else { continue };
        let side = if value == high_value { &mut high } else { &mut rest };
        if exam.label == Label::Cancer {
            side.pos.push(exam.score);
        } else {
            side.neg.push(exam.score);
        }
    }
    let n = high.len() + rest.len();

    let points = fractions
        .iter()
        .enumerate()
        .map(|(k, &fraction)| {
            let n_high = ((fraction * n as f64).ceil() as usize).min(n);
            let n_rest = n - n_high;
            let mut aucs = Vec::with_capacity(subsets_per_point);
            for s in 0..subsets_per_point {
                let mut rng = stream_rng(seed, stream_id(&[k as u64, s as u64]));
                let (mut pos, mut neg) = (Vec::new(), Vec::new());
                if !high.draw(n_high, &mut rng, &mut pos, &mut neg) || !rest.draw(n_rest, &mut rng, &mut pos, &mut neg) {
                    break;
                }
                if let Ok(v) = auc(&pos, &neg) {
                    aucs.push(v);
                }
            }
            let stats = mean_std(&aucs);
            CompositionPoint {
                fraction,
                n_high,
                n_rest,
                defined_subsets: aucs.len(),
                mean_auc: stats.map(|s| s.0),
                std_auc: stats.map(|s| s.1),
            }
        })
        .collect();

    Ok(CompositionCurve {
        attribute: attr.name.clone(),
        high_value: high_value.to_string(),
        evaluation_size: n,
        subsets_per_point,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::tests_support::exams_with_counts;
    use crate::binormal::linspace;

    #[test]
    fn sizes_follow_the_fraction() {
        let exams = exams_with_counts("d", &[("A", 10, 30), ("B", 20, 40)]);
        let attr = AttributeDef::new("d", &["A", "B"]);
        let c = composition_sweep(&exams, &attr, "B", &linspace(0.0, 1.0, 5), 4, 0).unwrap();
        assert_eq!(c.evaluation_size, 100);
        let sizes: Vec<(usize, usize)> = c.points.iter().map(|p| (p.n_high, p.n_rest)).collect();
        assert_eq!(sizes, vec![(0, 100), (25, 75), (50, 50), (75, 25), (100, 0)]);
        // positives above negatives in both values, so every subset is perfect
        assert!(c.points.iter().all(|p| p.mean_auc == Some(1.0) && p.defined_subsets == 4));
    }

    #[test]
    fn empty_side_marks_point_undefined() {
        let exams = exams_with_counts("d", &[("A", 10, 30)]);
        let attr = AttributeDef::new("d", &["A", "B"]);
        let c = composition_sweep(&exams, &attr, "B", &[0.0, 0.5], 3, 0).unwrap();
        assert_eq!(c.points[0].defined_subsets, 3);
        assert_eq!(c.points[1].mean_auc, None);
        assert_eq!(c.points[1].defined_subsets, 0);
    }

    #[test]
    fn bad_arguments() {
        let exams = exams_with_counts("d", &[("A", 1, 3), ("B", 1, 3)]);
        let attr = AttributeDef::new("d", &["A", "B"]);
        assert!(composition_sweep(&exams, &attr, "C", &[0.5], 3, 0).is_err());
        assert!(composition_sweep(&exams, &attr, "B", &[1.5], 3, 0).is_err());
        assert!(composition_sweep(&exams, &attr, "B", &[0.5], 0, 0).is_err());
    }
}
