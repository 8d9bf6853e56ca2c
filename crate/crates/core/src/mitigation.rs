//! Shortcut mitigations emitted as data: balanced sampling weights,
//! single-value filters and prevalence-matched evaluation sets.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingestion::{AttributeDef, ExamRecord, Label};
use crate::rng::stream_rng;

/// Text stored in the weight sidecar.
pub const WEIGHT_SEMANTICS: &str = "Each weight is the probability of drawing that exam in one \
multinomial draw. Every (attribute value, label) cell carries total mass 1/(2V) for V values, \
split uniformly over the exams of the cell. Exams with an unknown label or without a declared \
value get no weight.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub exam_id: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMass {
    pub value: String,
    pub label: Label,
    pub count: usize,
    pub mass: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingWeightTable {
    pub attribute: String,
    pub rows: Vec<WeightRow>,
    pub cells: Vec<CellMass>,
    pub excluded: usize,
}

/// JSON document written next to the weight CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSidecar {
    pub attribute: String,
    pub grouping: Vec<String>,
    pub semantics: String,
    pub cells: Vec<CellMass>,
    pub excluded: usize,
}

impl SamplingWeightTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["exam_id", "weight"])?;
        for row in &self.rows {
            w.write_record([row.exam_id.as_str(), &format!("{:e}", row.weight)])?;
        }
        w.flush().map_err(|e| Error::io("<weights>", e))?;
        Ok(())
    }

    pub fn sidecar(&self) -> WeightSidecar {
        WeightSidecar {
            attribute: self.attribute.clone(),
            grouping: vec![self.attribute.clone(), "label".into()],
            semantics: WEIGHT_SEMANTICS.into(),
            cells: self.cells.clone(),
            excluded: self.excluded,
        }
    }

    pub fn weight_of(&self, exam_id: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.exam_id == exam_id).map(|r| r.weight)
    }
}

pub fn balanced_weights(exams: &[ExamRecord], attribute: &AttributeDef) -> Result<SamplingWeightTable> {
    let v = attribute.values.len();
    // value index -> [positives, negatives]
    let mut counts = vec![[0usize; 2]; v];
    let cell_of = |e: &ExamRecord| -> Option<(usize, usize)> {
        let pos = e.label.is_positive()?;
        let value = e.attribute(&attribute.name)?;
        let vi = attribute.values.iter().position(|x| x == value)?;
        Some((vi, if pos { 0 } else { 1 }))
    };
    for e in exams {
        if let Some((vi, li)) = cell_of(e) {
            counts[vi][li] += 1;
        }
    }
    for (vi, c) in counts.iter().enumerate() {
        for (li, label) in [Label::Cancer, Label::NonCancer].into_iter().enumerate() {
            if c[li] == 0 {
                return Err(Error::EmptyCell {
                    attribute: attribute.name.clone(),
                    value: attribute.values[vi].clone(),
                    label: label.as_str().into(),
                });
            }
        }
    }

    let mass = 1.0 / (2 * v) as f64;
    let mut rows = Vec::new();
    let mut excluded = 0;
    for e in exams {
        match cell_of(e) {
            Some((vi, li)) => rows.push(WeightRow {
                exam_id: e.exam_id.clone(),
                weight: mass / counts[vi][li] as f64,
            }),
            None => excluded += 1,
        }
    }
    let cells = attribute
        .values
        .iter()
        .zip(&counts)
        .flat_map(|(value, c)| {
            [(Label::Cancer, c[0]), (Label::NonCancer, c[1])].map(|(label, count)| CellMass {
                value: value.clone(),
                label,
                count,
                mass,
                weight: mass / count as f64,
            })
        })
        .collect();
    Ok(SamplingWeightTable {
        attribute: attribute.name.clone(),
        rows,
        cells,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<ExamRecord>,
    pub removed: usize,
    /// False when no exam carried `keep_value`; the kept list is then empty.
    pub keep_value_present: bool,
}

pub fn filter_by_attribute(exams: &[ExamRecord], attribute: &str, keep_value: &str) -> FilterOutcome {
    let kept: Vec<ExamRecord> = exams
        .iter()
        .filter(|e| e.attribute(attribute) == Some(keep_value))
        .cloned()
        .collect();
    FilterOutcome {
        removed: exams.len() - kept.len(),
        keep_value_present: !kept.is_empty(),
        kept,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedValue {
    pub value: String,
    pub positives_in: usize,
    pub negatives_in: usize,
    pub positives_out: usize,
    pub negatives_out: usize,
}

impl MatchedValue {
    pub fn prevalence_out(&self) -> f64 {
        self.positives_out as f64 / (self.positives_out + self.negatives_out) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedEvaluation {
    pub attribute: String,
    pub target_prevalence: f64,
    /// Selected exams in input order.
    pub exams: Vec<ExamRecord>,
    pub per_value: Vec<MatchedValue>,
    /// Unknown-label exams and exams without the attribute.
    pub dropped: usize,
}

/// Downsamples each attribute value to `target` prevalence.
///
/// Every value is scaled by the same factor, the largest one at which all
/// values can reach the target without upsampling, so the relative value
/// sizes are kept up to rounding. Within a value the kept positives and
/// negatives are drawn without replacement.
pub fn prevalence_matched_eval(
    exams: &[ExamRecord],
    attribute: &str,
    target: f64,
    seed: u64,
) -> Result<MatchedEvaluation> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target prevalence {target} must lie strictly between 0 and 1"
        )));
    }
    // value -> (positive indices, negative indices)
    let mut groups: BTreeMap<&str, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    let mut dropped = 0;
    for (i, e) in exams.iter().enumerate() {
        match (e.label.is_positive(), e.attribute(attribute)) {
            (Some(pos), Some(value)) => {
                let g = groups.entry(value).or_default();
                if pos { g.0.push(i) } else { g.1.push(i) }
            }
            _ => dropped += 1,
        }
    }
    if groups.is_empty() {
        return Err(Error::UnknownAttribute(attribute.into()));
    }

    let unreachable = |value: &str, p: usize, n: usize| {
        let (min, max) = if p == 0 || n == 0 {
            let only = if p == 0 { 0.0 } else { 1.0 };
            (only, only)
        } else {
            (1.0 / (1.0 + n as f64), p as f64 / (p as f64 + 1.0))
        };
        Error::UnreachablePrevalence {
            attribute: attribute.into(),
            value: value.into(),
            target,
            min,
            max,
        }
    };

    let mut scale = 1.0f64;
    for (value, (pos, neg)) in &groups {
        let (p, n) = (pos.len() as f64, neg.len() as f64);
        if pos.is_empty() || neg.is_empty() {
            return Err(unreachable(value, pos.len(), neg.len()));
        }
        // largest subset at the target prevalence
        let size = if p / (p + n) >= target { n / (1.0 - target) } else { p / target };
        scale = scale.min(size / (p + n));
    }

    let mut keep = Vec::new();
    let mut per_value = Vec::new();
    for (k, (value, (pos, neg))) in groups.iter().enumerate() {
        let size = scale * (pos.len() + neg.len()) as f64;
        let p_out = ((target * size).round() as usize).min(pos.len());
        let n_out = (((1.0 - target) * size).round() as usize).min(neg.len());
        if p_out == 0 || n_out == 0 {
            return Err(unreachable(value, pos.len(), neg.len()));
        }
        let mut rng = stream_rng(seed, k as u64);
        keep.extend(index::sample(&mut rng, pos.len(), p_out).into_iter().map(|i| pos[i]));
        keep.extend(index::sample(&mut rng, neg.len(), n_out).into_iter().map(|i| neg[i]));
        per_value.push(MatchedValue {
            value: value.to_string(),
            positives_in: pos.len(),
            negatives_in: neg.len(),
            positives_out: p_out,
            negatives_out: n_out,
        });
    }
    keep.sort_unstable();
    Ok(MatchedEvaluation {
        attribute: attribute.into(),
        target_prevalence: target,
        exams: keep.into_iter().map(|i| exams[i].clone()).collect(),
        per_value,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::tests_support::exams_with_counts;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn def() -> AttributeDef {
        AttributeDef::new("site", &["A", "B"])
    }

    #[test]
    fn weights_for_unbalanced_cells() {
        let exams = exams_with_counts("site", &[("A", 10, 90), ("B", 40, 60)]);
        let t = balanced_weights(&exams, &def()).unwrap();
        let close = |id: &str, w: f64| assert!((t.weight_of(id).unwrap() - w).abs() < 1e-15, "{id}");
        close("A-p0", 0.025);
        close("A-n0", 1.0 / 360.0);
        close("B-p0", 0.00625);
        close("B-n0", 1.0 / 240.0);
        let total: f64 = t.rows.iter().map(|r| r.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(t.cells.iter().all(|c| c.mass == 0.25));
    }

    #[test]
    fn balanced_cells_give_uniform_weights() {
        let exams = exams_with_counts("site", &[("A", 25, 25), ("B", 25, 25)]);
        let t = balanced_weights(&exams, &def()).unwrap();
        assert!(t.rows.iter().all(|r| r.weight == 0.01));
    }

    #[test]
    fn empty_cell_is_named() {
        let exams = exams_with_counts("site", &[("A", 10, 90), ("B", 0, 60)]);
        match balanced_weights(&exams, &def()) {
            Err(Error::EmptyCell { value, label, .. }) => {
                assert_eq!(value, "B");
                assert_eq!(label, "cancer");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn weight_csv_and_sidecar() {
        let exams = exams_with_counts("site", &[("A", 1, 1), ("B", 1, 1)]);
        let t = balanced_weights(&exams, &def()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("exam_id,weight\nA-p0,2.5e-1\n"), "{text}");
        let side = serde_json::to_value(t.sidecar()).unwrap();
        assert_eq!(side["cells"].as_array().unwrap().len(), 4);
        assert_eq!(side["grouping"], serde_json::json!(["site", "label"]));
    }

    #[test]
    fn filter_keeps_exact_subset() {
        let mut exams = exams_with_counts("type", &[("screening", 3, 4), ("diagnostic", 2, 2)]);
        exams[0].attributes.clear();
        let out = filter_by_attribute(&exams, "type", "screening");
        assert_eq!(out.kept.len(), 6);
        assert_eq!(out.removed, 5);
        assert!(out.kept.iter().all(|e| e.attribute("type") == Some("screening")));
        let again = filter_by_attribute(&out.kept, "type", "screening");
        assert_eq!(again.kept, out.kept);

        let none = filter_by_attribute(&exams, "type", "other");
        assert!(none.kept.is_empty() && !none.keep_value_present);
        assert_eq!(none.removed, exams.len());
    }

    #[test]
    fn matched_downsamples_majority_class() {
        let exams = exams_with_counts("site", &[("A", 40, 60)]);
        let m = prevalence_matched_eval(&exams, "site", 0.2, 3).unwrap();
        assert_eq!(m.per_value[0].positives_out, 15);
        assert_eq!(m.per_value[0].negatives_out, 60);
        assert_eq!(m.exams.len(), 75);
    }

    #[test]
    fn matched_on_target_is_identity() {
        let exams = exams_with_counts("site", &[("A", 20, 80), ("B", 10, 40)]);
        let m = prevalence_matched_eval(&exams, "site", 0.2, 0).unwrap();
        assert_eq!(m.exams, exams);
    }

    #[test]
    fn matched_rejects_bad_targets() {
        let exams = exams_with_counts("site", &[("A", 20, 80), ("B", 10, 40)]);
        for t in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(prevalence_matched_eval(&exams, "site", t, 0), Err(Error::InvalidParameter(_))));
        }
        let tiny = exams_with_counts("site", &[("A", 1, 2), ("B", 10, 40)]);
        match prevalence_matched_eval(&tiny, "site", 0.9, 0) {
            Err(Error::UnreachablePrevalence { value, min, max, .. }) => {
                assert_eq!(value, "A");
                assert!((min - 1.0 / 3.0).abs() < 1e-12 && (max - 0.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let no_pos = exams_with_counts("site", &[("A", 0, 2), ("B", 10, 40)]);
        assert!(matches!(
            prevalence_matched_eval(&no_pos, "site", 0.2, 0),
            Err(Error::UnreachablePrevalence { .. })
        ));
    }

    proptest! {
        #[test]
        fn matched_is_within_rounding_and_a_subset(
            a in (1usize..60, 1usize..60),
            b in (1usize..60, 1usize..60),
            target in 0.05f64..0.95,
            seed in any::<u64>(),
        ) {
            let exams = exams_with_counts("site", &[("A", a.0, a.1), ("B", b.0, b.1)]);
            let Ok(m) = prevalence_matched_eval(&exams, "site", target, seed) else { return Ok(()) };
            let ids: BTreeSet<_> = m.exams.iter().map(|e| e.exam_id.as_str()).collect();
            prop_assert_eq!(ids.len(), m.exams.len());
            prop_assert!(m.exams.iter().all(|e| exams.contains(e)));
            for v in &m.per_value {
                let size = (v.positives_out + v.negatives_out) as f64;
                prop_assert!((v.prevalence_out() - target).abs() <= 0.5 / size + 1e-12);
                prop_assert!(v.positives_out <= v.positives_in && v.negatives_out <= v.negatives_in);
            }
        }

        #[test]
        fn weights_sum_to_one(cells in proptest::collection::vec((1usize..40, 1usize..40), 2..5)) {
            let names: Vec<String> = (0..cells.len()).map(|i| format!("v{i}")).collect();
            let spec: Vec<(&str, usize, usize)> = names.iter().zip(&cells).map(|(n, c)| (n.as_str(), c.0, c.1)).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let exams = exams_with_counts("site", &spec);
            let t = balanced_weights(&exams, &AttributeDef::new("site", &refs)).unwrap();
            let total: f64 = t.rows.iter().map(|r| r.weight).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            let masses: Vec<f64> = t.cells.iter().map(|c| c.weight * c.count as f64).collect();
            let hi = masses.iter().cloned().fold(f64::MIN, f64::max);
            let lo = masses.iter().cloned().fold(f64::MAX, f64::min);
            prop_assert!((hi / lo - 1.0).abs() < 1e-12);
        }
    }
}
