use serde::{Deserialize, Serialize};

use super::labeled;
use crate::error::{Error, Result};
use crate::ingestion::{AttributeDef, ExamRecord, Label};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceRow {
    pub value: String,
    pub prevalence: f64,
    pub positive_count: usize,
    pub total_count: usize,
}

/// Cancer prevalence per attribute value, over labeled exams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceTable {
    pub attribute: String,
    pub rows: Vec<PrevalenceRow>,
    /// Declared values with no labeled exam.
    pub empty_values: Vec<String>,
    /// Labeled exams whose value is missing or undeclared.
    pub unassigned: usize,
}

impl PrevalenceTable {
    pub fn row(&self, value: &str) -> Option<&PrevalenceRow> {
        self.rows.iter().find(|r| r.value == value)
    }
}

pub fn prevalence_table(exams: &[ExamRecord], attr: &AttributeDef) -> Result<PrevalenceTable> {
    let mut counts = vec![(0usize, 0usize); attr.values.len()];
    let mut unassigned = 0;
    let mut seen_key = false;
    for exam in labeled(exams) {
        let value = exam.attribute(&attr.name);
        seen_key |= value.is_some();
        match value.and_then(|v| attr.values.iter().position(|d| d == v)) {
            Some(i) => {
                counts[i].1 += 1;
                if exam.label == Label::Cancer {
                    counts[i].0 += 1;
                }
            }
            None => unassigned += 1,
        }
    }
    if !seen_key && labeled(exams).next().is_some() {
        return Err(Error::UnknownAttribute(attr.name.clone()));
    }

    let mut rows = Vec::new();
    let mut empty_values = Vec::new();
    for (value, (pos, total)) in attr.values.iter().zip(counts) {
        if total == 0 {
            empty_values.push(value.clone());
        } else {
            rows.push(PrevalenceRow {
                value: value.clone(),
                prevalence: pos as f64 / total as f64,
                positive_count: pos,
                total_count: total,
            });
        }
    }
    Ok(PrevalenceTable {
        attribute: attr.name.clone(),
        rows,
        empty_values,
        unassigned,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HighValueSource {
    Schema,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighValue {
    pub value: String,
    pub source: HighValueSource,
}

/// The schema's high-prevalence value, or else the value with the largest
/// observed prevalence (first declared wins a tie).
pub fn resolve_high_value(exams: &[ExamRecord], attr: &AttributeDef) -> Result<HighValue> {
    if let Some(value) = &attr.high_prevalence_value {
        return Ok(HighValue {
            value: value.clone(),
            source: HighValueSource::Schema,
        });
    }
    let table = prevalence_table(exams, attr)?;
    let mut best: Option<&PrevalenceRow> = None;
    for row in &table.rows {
        if best.is_none_or(|b| row.prevalence > b.prevalence) {
            best = Some(row);
        }
    }
    best.map(|row| HighValue {
        value: row.value.clone(),
        source: HighValueSource::Empirical,
    })
    .ok_or_else(|| Error::Undefined(format!("high-prevalence value of `{}`: no labeled exams", attr.name)))
}
