//! Ground-truth labeling from biopsy and follow-up history.
//!
//! Windows are fixed day counts with inclusive boundaries: the cancer
//! window is 365 days and the required negative follow-up is 730 days.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::records::Label;

pub const CANCER_WINDOW_DAYS: i64 = 365;
pub const FOLLOW_UP_DAYS: i64 = 730;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiopsyOutcome {
    Malignant,
    #[serde(alias = "benign", alias = "high_risk")]
    BenignOrHighRisk,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiopsyEvent {
    pub date: NaiveDate,
    pub outcome: BiopsyOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FollowUp {
    pub date: NaiveDate,
    pub birads: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamHistory {
    pub exam_date: NaiveDate,
    pub biopsy_events: Vec<BiopsyEvent>,
    pub followup_assessments: Vec<FollowUp>,
}

/// One line of a history JSONL file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub exam_id: String,
    pub exam_date: NaiveDate,
    pub exam_birads: u8,
    #[serde(default)]
    pub biopsies: Vec<BiopsyEvent>,
    #[serde(default)]
    pub followups: Vec<FollowUp>,
}

impl HistoryEntry {
    pub fn history(&self) -> ExamHistory {
        ExamHistory {
            exam_date: self.exam_date,
            biopsy_events: self.biopsies.clone(),
            followup_assessments: self.followups.clone(),
        }
    }

    pub fn label(&self) -> Label {
        label_exam(&self.history(), self.exam_birads)
    }
}

/// Labels an exam.
///
/// * Cancer: a malignant biopsy within 365 days, or the exam itself is
///   BI-RADS 6.
/// * Non-cancer: no biopsy of any outcome later than 365 days, and
///   follow-up reaching at least 730 days in which every assessment up to
///   and including the one that reaches 730 days is BI-RADS 3 or lower.
/// * Unknown otherwise.
///
/// Events dated before the exam are ignored. Follow-up assessments dated on
/// the exam day are the exam itself and do not count as follow-up.
pub fn label_exam(history: &ExamHistory, exam_birads: u8) -> Label {
    let days = |d: NaiveDate| (d - history.exam_date).num_days();

    let biopsies: Vec<(i64, BiopsyOutcome)> = history
        .biopsy_events
        .iter()
        .map(|b| (days(b.date), b.outcome))
        .filter(|(d, _)| *d >= 0)
        .collect();

    if exam_birads == 6
        || biopsies
            .iter()
            .any(|&(d, o)| o == BiopsyOutcome::Malignant && d <= CANCER_WINDOW_DAYS)
    {
        return Label::Cancer;
    }

    if biopsies.iter().any(|&(d, _)| d > CANCER_WINDOW_DAYS) {
        return Label::Unknown;
    }

    let mut followups: Vec<(i64, u8)> = history
        .followup_assessments
        .iter()
        .map(|f| (days(f.date), f.birads))
        .filter(|(d, _)| *d > 0)
        .collect();
    followups.sort_unstable();

    let Some(reach) = followups.iter().position(|(d, _)| *d >= FOLLOW_UP_DAYS) else {
        return Label::Unknown;
    };
    if followups[..=reach].iter().all(|(_, b)| *b <= 3) {
        Label::NonCancer
    } else {
        Label::Unknown
    }
}
