//! Two-valued exam sets drawn from the binormal model.
//!
//! Set 0 maps to the first attribute value and Set 1 (the shifted set) to
//! the second, so with a larger Set 1 prevalence the second value is the
//! high-prevalence one.

use serde::{Deserialize, Serialize};

use crate::binormal::{normal_cdf, sample_combined, BinormalSpec};
use crate::error::Result;
use crate::ingestion::{AttributeDef, ExamRecord, Label};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticExams {
    pub attribute: String,
    pub values: [String; 2],
    pub spec: BinormalSpec,
    /// Map scores through the standard normal CDF so they lie in [0, 1].
    /// Far-tail scores saturate to exactly 0 or 1 and then tie.
    pub probability_scores: bool,
}

impl SyntheticExams {
    pub fn new(spec: BinormalSpec) -> Self {
        SyntheticExams {
            attribute: "group".into(),
            values: ["A".into(), "B".into()],
            spec,
            probability_scores: false,
        }
    }

    pub fn attribute_def(&self) -> AttributeDef {
        let def = AttributeDef::new(&self.attribute, &[&self.values[0], &self.values[1]]);
        if self.spec.prevalence_set1 > self.spec.prevalence_set0 {
            def.with_high_value(&self.values[1])
        } else if self.spec.prevalence_set0 > self.spec.prevalence_set1 {
            def.with_high_value(&self.values[0])
        } else {
            def
        }
    }

    pub fn generate(&self) -> Result<Vec<ExamRecord>> {
        let sample = sample_combined(&self.spec)?;
        let mut out = Vec::with_capacity(sample.pos.len() + sample.neg.len());
        let classes = [
            (&sample.pos, &sample.pos_set, Label::Cancer, "p"),
            (&sample.neg, &sample.neg_set, Label::NonCancer, "n"),
        ];
        for (scores, sets, label, tag) in classes {
            for (i, (&s, &set)) in scores.iter().zip(sets.iter()).enumerate() {
                let value = &self.values[set as usize];
                out.push(ExamRecord {
                    exam_id: format!("{value}-{tag}{i}"),
                    patient_id: format!("{tag}{i}"),
                    score: if self.probability_scores { normal_cdf(s) } else { s },
                    label,
                    attributes: [(self.attribute.clone(), value.clone())].into_iter().collect(),
                });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binormal::combined_auc_delta;
    use crate::metrics::auc_of;

    fn spec(seed: u64) -> BinormalSpec {
        BinormalSpec {
            target_auc: 0.7,
            bias_m: 2.0,
            prevalence_set0: 0.2,
            prevalence_set1: 0.8,
            n_set0: 500,
            n_set1: 500,
            seed,
        }
    }

    #[test]
    fn layout_and_counts() {
        let syn = SyntheticExams::new(spec(1));
        let exams = syn.generate().unwrap();
        assert_eq!(exams.len(), 1000);
        let count = |v: &str, l: Label| exams.iter().filter(|e| e.attribute("group") == Some(v) && e.label == l).count();
        assert_eq!(count("A", Label::Cancer), 100);
        assert_eq!(count("B", Label::Cancer), 400);
        assert_eq!(syn.attribute_def().high_prevalence_value.as_deref(), Some("B"));
    }

    #[test]
    fn probability_scale_keeps_auc_for_moderate_scores() {
        let mut syn = SyntheticExams::new(BinormalSpec { bias_m: 0.5, ..spec(2) });
        let raw = auc_of(&syn.generate().unwrap()).unwrap();
        syn.probability_scores = true;
        let exams = syn.generate().unwrap();
        assert!(exams.iter().all(|e| (0.0..=1.0).contains(&e.score)));
        assert_eq!(auc_of(&exams).unwrap(), raw);
    }

    #[test]
    fn combined_auc_follows_closed_form() {
        let big = BinormalSpec { n_set0: 20_000, n_set1: 20_000, ..spec(3) };
        let exams = SyntheticExams::new(big.clone()).generate().unwrap();
        let mix = crate::binormal::SamplingMix::new(0.2, 0.8).unwrap();
        let expect = 0.7 + combined_auc_delta(0.7, 2.0, mix).unwrap();
        assert!((auc_of(&exams).unwrap() - expect).abs() < 0.01);
    }
}
