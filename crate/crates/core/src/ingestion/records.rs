use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Laterality {
    Left,
    Right,
}

impl FromStr for Laterality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l" | "left" => Ok(Laterality::Left),
            "r" | "right" => Ok(Laterality::Right),
            "" => Err("missing laterality".into()),
            other => Err(format!("unknown laterality `{other}`")),
        }
    }
}

/// One row of an image-level prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageScoreRecord {
    pub image_id: String,
    pub exam_id: String,
    pub laterality: Laterality,
    pub view: String,
    pub score: f64,
}

/// Ground-truth label of an exam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Cancer,
    NonCancer,
    Unknown,
}

impl Label {
    /// `Some(true)` for cancer, `Some(false)` for non-cancer, `None` when the
    /// exam must be left out of metrics.
    pub fn is_positive(self) -> Option<bool> {
        match self {
            Label::Cancer => Some(true),
            Label::NonCancer => Some(false),
            Label::Unknown => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Cancer => "cancer",
            Label::NonCancer => "non_cancer",
            Label::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cancer" => Ok(Label::Cancer),
            "non_cancer" => Ok(Label::NonCancer),
            "unknown" => Ok(Label::Unknown),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

/// An exam-level score with its label and categorical attributes.
///
/// Scores read from prediction files are validated to lie in `[0, 1]`;
/// synthetic exams may carry unbounded scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamRecord {
    pub exam_id: String,
    pub patient_id: String,
    pub score: f64,
    pub label: Label,
    pub attributes: BTreeMap<String, String>,
}

impl ExamRecord {
    pub fn attribute(&self, name: &str) -> Option<&str> {
        self.attributes.get(name).map(String::as_str)
    }
}

/// Anything with a score and a label. Metrics and the bootstrap work over
/// this so they accept owned records, references and plain pairs alike.
pub trait Scored {
    fn score(&self) -> f64;
    fn label(&self) -> Label;
}

impl Scored for ExamRecord {
    fn score(&self) -> f64 {
        self.score
    }
    fn label(&self) -> Label {
        self.label
    }
}

impl Scored for (f64, bool) {
    fn score(&self) -> f64 {
        self.0
    }
    fn label(&self) -> Label {
        if self.1 {
            Label::Cancer
        } else {
            Label::NonCancer
        }
    }
}

impl<T: Scored + ?Sized> Scored for &T {
    fn score(&self) -> f64 {
        (**self).score()
    }
    fn label(&self) -> Label {
        (**self).label()
    }
}
