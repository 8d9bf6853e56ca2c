use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::records::ExamRecord;
use crate::error::{Error, Result};

/// A categorical attribute and its declared values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub name: String,
    pub values: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high_prevalence_value: Option<String>,
}

impl AttributeDef {
    pub fn new(name: impl Into<String>, values: &[&str]) -> Self {
        AttributeDef {
            name: name.into(),
            values: values.iter().map(|v| v.to_string()).collect(),
            high_prevalence_value: None,
        }
    }

    pub fn with_high_value(mut self, value: impl Into<String>) -> Self {
        self.high_prevalence_value = Some(value.into());
        self
    }

    pub fn has_value(&self, value: &str) -> bool {
        self.values.iter().any(|v| v == value)
    }

    fn check(&self) -> Result<()> {
        let distinct: BTreeSet<&str> = self.values.iter().map(String::as_str).collect();
        if distinct.len() < 2 {
            return Err(Error::Schema(format!(
                "attribute `{}` needs at least two distinct values",
                self.name
            )));
        }
        if distinct.len() != self.values.len() {
            return Err(Error::Schema(format!("attribute `{}` repeats a value", self.name)));
        }
        if let Some(high) = &self.high_prevalence_value {
            if !self.has_value(high) {
                return Err(Error::Schema(format!(
                    "high-prevalence value `{high}` is not a value of `{}`",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// The set of attributes an exam file is expected to carry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub attributes: Vec<AttributeDef>,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<AttributeDef>) -> Result<Self> {
        let schema = AttributeSchema { attributes };
        schema.check()?;
        Ok(schema)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let schema: AttributeSchema = serde_json::from_str(text)
            .map_err(|e| Error::Schema(e.to_string()))?;
        schema.check()?;
        Ok(schema)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Schema(msg) => Error::Schema(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn get(&self, name: &str) -> Result<&AttributeDef> {
        self.attributes
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for attr in &self.attributes {
            if !seen.insert(attr.name.as_str()) {
                return Err(Error::Schema(format!("attribute `{}` declared twice", attr.name)));
            }
            attr.check()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    MissingAttribute { attribute: String },
    UndeclaredValue { attribute: String, value: String },
    UndeclaredAttribute { attribute: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub exam_id: String,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every exam whose attribute map does not match the schema exactly.
pub fn validate_against_schema(exams: &[ExamRecord], schema: &AttributeSchema) -> ValidationReport {
    let mut violations = Vec::new();
    for exam in exams {
        for attr in &schema.attributes {
            match exam.attribute(&attr.name) {
                None => violations.push(Violation {
                    exam_id: exam.exam_id.clone(),
                    kind: ViolationKind::MissingAttribute { attribute: attr.name.clone() },
                }),
                Some(value) if !attr.has_value(value) => violations.push(Violation {
                    exam_id: exam.exam_id.clone(),
                    kind: ViolationKind::UndeclaredValue {
                        attribute: attr.name.clone(),
                        value: value.to_string(),
                    },
                }),
                Some(_) => {}
            }
        }
        for key in exam.attributes.keys() {
            if schema.get(key).is_err() {
                violations.push(Violation {
                    exam_id: exam.exam_id.clone(),
                    kind: ViolationKind::UndeclaredAttribute { attribute: key.clone() },
                });
            }
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::Label;

    fn schema() -> AttributeSchema {
        AttributeSchema::new(vec![
            AttributeDef::new("scanner", &["HS", "SD"]),
            AttributeDef::new("dataset", &["WUSTL", "OPTIMAM"]).with_high_value("OPTIMAM"),
        ])
        .unwrap()
    }

    fn exam(id: &str, attrs: &[(&str, &str)]) -> ExamRecord {
        ExamRecord {
            exam_id: id.into(),
            patient_id: "p".into(),
            score: 0.5,
            label: Label::NonCancer,
            attributes: attrs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    #[test]
    fn conforming_exams_have_empty_report() {
        let exams = [exam("a", &[("scanner", "HS"), ("dataset", "WUSTL")])];
        assert!(validate_against_schema(&exams, &schema()).is_valid());
    }

    #[test]
    fn undeclared_value_names_exam() {
        let exams = [exam("a", &[("scanner", "HS2"), ("dataset", "WUSTL")])];
        let report = validate_against_schema(&exams, &schema());
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].exam_id, "a");
    }

    #[test]
    fn missing_key_is_reported() {
        let exams = [exam("b", &[("dataset", "WUSTL")])];
        let report = validate_against_schema(&exams, &schema());
        assert_eq!(
            report.violations,
            vec![Violation {
                exam_id: "b".into(),
                kind: ViolationKind::MissingAttribute { attribute: "scanner".into() }
            }]
        );
    }

    #[test]
    fn schema_rules() {
        assert!(AttributeSchema::new(vec![AttributeDef::new("x", &["a"])]).is_err());
        assert!(AttributeSchema::new(vec![AttributeDef::new("x", &["a", "a"])]).is_err());
        assert!(AttributeSchema::new(vec![AttributeDef::new("x", &["a", "b"]).with_high_value("c")])
            .is_err());
        let json = r#"{"attributes":[{"name":"exam_type","values":["screening","diagnostic"]}]}"#;
        let parsed = AttributeSchema::from_json(json).unwrap();
        assert_eq!(parsed.get("exam_type").unwrap().values.len(), 2);
        assert!(matches!(parsed.get("nope"), Err(Error::UnknownAttribute(_))));
    }
}
