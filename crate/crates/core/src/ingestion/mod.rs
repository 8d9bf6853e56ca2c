//! Reading prediction files, aggregating image scores into exam scores,
//! ground-truth labeling and schema validation.

mod aggregate;
mod files;
mod labeling;
mod records;
mod schema;

pub use aggregate::{aggregate_exam_score, aggregate_exams, ExamScore};
pub use files::{
    join_exam_records, parse_exam_metadata, parse_exam_records, parse_history, parse_image_scores, parse_labels,
    read_exam_metadata, read_exam_records, read_history, read_image_scores, read_labels, write_exam_records,
    write_labels, ExamMetadata,
};
pub use labeling::{label_exam, BiopsyEvent, BiopsyOutcome, ExamHistory, FollowUp, HistoryEntry};
pub use records::{ExamRecord, ImageScoreRecord, Label, Laterality, Scored};
pub use schema::{
    validate_against_schema, AttributeDef, AttributeSchema, ValidationReport, Violation,
    ViolationKind,
};
