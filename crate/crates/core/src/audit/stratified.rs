use serde::{Deserialize, Serialize};

use super::bias::{ClassCounts, Estimate};
use super::{labeled, sub_seed};
use crate::error::{Error, Result};
use crate::ingestion::{AttributeDef, ExamRecord, Label};
use crate::metrics::{bootstrap_auc_ci, BootstrapSettings, ConfidenceInterval};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumAuc {
    pub value: String,
    pub counts: ClassCounts,
    pub auc: Estimate,
}

/// Per-value and pooled AUC. The paradox flag is raised when the pooled
/// point estimate exceeds every defined stratum's point estimate; the
/// intervals carry the uncertainty, the flag applies no tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedAucReport {
    pub attribute: String,
    pub strata: Vec<StratumAuc>,
    pub combined: ConfidenceInterval,
    pub max_stratum_point: Option<f64>,
    pub paradox_flag: bool,
    pub undefined_strata: Vec<String>,
}

pub fn stratified_auc_report(
    exams: &[ExamRecord],
    attr: &AttributeDef,
    settings: &BootstrapSettings,
) -> Result<StratifiedAucReport> {
    let mut groups: Vec<Vec<&ExamRecord>> = vec![Vec::new(); attr.values.len()];
    for exam in labeled(exams) {
        if let Some(i) = exam.attribute(&attr.name).and_then(|v| attr.values.iter().position(|d| d == v)) {
            groups[i].push(exam);
        }
    }
    let present = groups.iter().filter(|g| !g.is_empty()).count();
    if present < 2 {
        return Err(Error::InvalidParameter(format!(
            "stratified AUC of `{}` needs at least two populated values, found {present}",
            attr.name
        )));
    }

    let mut strata = Vec::new();
    let mut undefined_strata = Vec::new();
    for (k, (value, group)) in attr.values.iter().zip(&groups).enumerate() {
        if group.is_empty() {
            continue;
        }
        let stratum_settings = BootstrapSettings {
            seed: sub_seed(settings.seed, 10 + k as u64),
            ..settings.clone()
        };
        let auc = Estimate::auc(group, &stratum_settings)?;
        if auc.point().is_none() {
            undefined_strata.push(value.clone());
        }
        let positives = group.iter().filter(|e| e.label == Label::Cancer).count();
        strata.push(StratumAuc {
            value: value.clone(),
            counts: ClassCounts {
                positives,
                negatives: group.len() - positives,
            },
            auc,
        });
    }

    let pooled: Vec<&ExamRecord> = groups.into_iter().flatten().collect();
    let combined = bootstrap_auc_ci(
        &pooled,
        &BootstrapSettings {
            seed: sub_seed(settings.seed, 0),
            ..settings.clone()
        },
    )?;
    let max_stratum_point = strata
        .iter()
        .filter_map(|s| s.auc.point())
        .reduce(f64::max);
    Ok(StratifiedAucReport {
        attribute: attr.name.clone(),
        paradox_flag: max_stratum_point.is_some_and(|m| combined.point > m),
        strata,
        combined,
        max_stratum_point,
        undefined_strata,
    })
}
