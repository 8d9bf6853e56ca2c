use serde::{Deserialize, Serialize};

use super::bias::{bias_gap, BiasGapReport};
use super::composition::{composition_sweep, CompositionCurve};
use super::distribution::{distribution_comparison, DistributionComparison};
use super::prevalence::{prevalence_table, resolve_high_value, HighValue, PrevalenceTable};
use super::stratified::{stratified_auc_report, StratifiedAucReport};
use crate::binormal::linspace;
use crate::error::{Error, Result};
use crate::ingestion::{AttributeDef, ExamRecord};
use crate::metrics::BootstrapSettings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSettings {
    pub bootstrap: BootstrapSettings,
    pub fractions: Vec<f64>,
    pub subsets_per_point: usize,
}

impl Default for AuditSettings {
    fn default() -> Self {
        AuditSettings {
            bootstrap: BootstrapSettings::default(),
            fractions: linspace(0.0, 1.0, 11),
            subsets_per_point: 10,
        }
    }
}

/// Everything the battery reports about one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeAudit {
    pub attribute: String,
    pub high_value: HighValue,
    pub prevalence: PrevalenceTable,
    pub distribution: DistributionComparison,
    pub bias_gap: BiasGapReport,
    pub stratified: Option<StratifiedAucReport>,
    pub composition: CompositionCurve,
    /// Parts of the battery that could not run, with the reason.
    pub notes: Vec<String>,
}

pub fn audit_attribute(exams: &[ExamRecord], attr: &AttributeDef, settings: &AuditSettings) -> Result<AttributeAudit> {
    let prevalence = prevalence_table(exams, attr)?;
    let high_value = resolve_high_value(exams, attr)?;
    let distribution = distribution_comparison(exams, attr);
    let bias_gap = bias_gap(exams, attr, &high_value.value, &settings.bootstrap)?;

    let mut notes = Vec::new();
    let stratified = match stratified_auc_report(exams, attr, &settings.bootstrap) {
        Ok(r) => Some(r),
        Err(e @ (Error::Undefined(_) | Error::InvalidParameter(_))) => {
            notes.push(format!("stratified AUC: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    let composition = composition_sweep(
        exams,
        attr,
        &high_value.value,
        &settings.fractions,
        settings.subsets_per_point,
        settings.bootstrap.seed,
    )?;
    Ok(AttributeAudit {
        attribute: attr.name.clone(),
        high_value,
        prevalence,
        distribution,
        bias_gap,
        stratified,
        composition,
        notes,
    })
}
