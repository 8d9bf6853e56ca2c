//! Shortcut-detection battery over one categorical attribute.
//!
//! All statistics run on exam-level scores and skip unknown labels. The
//! "high" value of an attribute is the one with the larger cancer
//! prevalence: taken from the schema when declared, otherwise estimated
//! from the data (the choice is echoed in every report).

mod battery;
mod bias;
mod composition;
mod distribution;
mod prevalence;
mod stratified;

pub use battery::{audit_attribute, AttributeAudit, AuditSettings};
pub use bias::{bias_gap, bias_subsets, BiasGapReport, BiasSubsets, ClassCounts, Estimate};
pub use composition::{composition_sweep, CompositionCurve, CompositionPoint};
pub use distribution::{distribution_comparison, ClassSummary, DistributionComparison, PairwiseKs, ValueDistribution};
pub use prevalence::{prevalence_table, resolve_high_value, HighValue, HighValueSource, PrevalenceRow, PrevalenceTable};
pub use stratified::{stratified_auc_report, StratifiedAucReport, StratumAuc};

use crate::ingestion::{ExamRecord, Label};

fn labeled(exams: &[ExamRecord]) -> impl Iterator<Item = &ExamRecord> {
    exams.iter().filter(|e| e.label != Label::Unknown)
}

/// Derives independent bootstrap seeds for the several estimates of one
/// report.
fn sub_seed(seed: u64, k: u64) -> u64 {
    crate::rng::stream_id(&[seed, k])
}
