//! Report documents written by the command-line tool.
//!
//! JSON is the canonical form. The Markdown rendering is produced from the
//! serialized JSON, and the plot tables are flat CSV views of the same
//! numbers. Each document embeds a [`RunManifest`]; its `generated_at`
//! field is the only part that changes between identical runs.

mod markdown;
mod plots;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::audit::{AttributeAudit, AuditSettings};
use crate::binormal::{Axis, SweepKind};
use crate::error::Result;
use crate::mitigation::WeightSidecar;

pub use markdown::render_audit_markdown;
pub use plots::{write_auc_csv, write_composition_csv, write_distribution_csv, write_ks_csv, write_prevalence_csv};

pub const AUDIT_REPORT_SCHEMA: &str = include_str!("../../schemas/audit-report.schema.json");
pub const PROBE_REPORT_SCHEMA: &str = include_str!("../../schemas/probe-report.schema.json");
pub const SIMULATION_REPORT_SCHEMA: &str = include_str!("../../schemas/simulation-report.schema.json");
pub const WEIGHTS_REPORT_SCHEMA: &str = include_str!("../../schemas/weights-report.schema.json");
pub const ARTIFACT_REPORT_SCHEMA: &str = include_str!("../../schemas/artifact-report.schema.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Every resolved parameter, defaults included.
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<InputDigest>,
    pub schema_digest: Option<String>,
    pub seed: Option<u64>,
    /// RFC 3339 wall-clock time of the run.
    pub generated_at: String,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> Self {
        RunManifest {
            tool: "shortcut-audit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            schema_digest: None,
            seed: None,
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn parameter(mut self, name: &str, value: impl Serialize) -> Self {
        self.parameters
            .insert(name.into(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub manifest: RunManifest,
    pub settings: AuditSettings,
    pub exam_count: usize,
    pub unknown_label_count: usize,
    pub attributes: Vec<AttributeAudit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub manifest: RunManifest,
    pub train_size: usize,
    pub test_size: usize,
    pub dimension: usize,
    pub l2_penalty: f64,
    pub iterations_run: usize,
    pub final_loss: f64,
    pub loss_history: Vec<f64>,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub manifest: RunManifest,
    pub kind: SweepKind,
    pub axes: Vec<Axis>,
    pub repetitions: usize,
    pub cell_count: usize,
    pub crossing_count: usize,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsReport {
    pub manifest: RunManifest,
    pub weights: WeightSidecar,
}

/// Manifest plus a short summary for the plain data-producing commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactReport {
    pub manifest: RunManifest,
    pub outputs: Vec<String>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    Ok(text)
}
