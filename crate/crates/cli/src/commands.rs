use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::json;

use shortcut_audit::audit::{audit_attribute, AuditSettings};
use shortcut_audit::binormal::{
    find_zero_crossings, linspace, run_p0p1_sweep, run_prevalence_bias_sweep, separation_from_auc,
    write_crossings_csv, BinormalSpec, P0P1Sweep, PrevalenceBiasSweep, SizeRange, SweepGrid,
};
use shortcut_audit::ingestion::{
    aggregate_exams, join_exam_records, parse_exam_metadata, parse_exam_records, parse_history, parse_image_scores,
    parse_labels, validate_against_schema, write_exam_records, write_labels, AttributeDef, AttributeSchema, ExamRecord,
    Label, ViolationKind,
};
use shortcut_audit::metrics::BootstrapSettings;
use shortcut_audit::mitigation::{balanced_weights, filter_by_attribute, prevalence_matched_eval};
use shortcut_audit::probe::{eval_probe, parse_features, train_probe, ProbeConfig};
use shortcut_audit::report::{
    render_audit_markdown, write_auc_csv, write_composition_csv, write_distribution_csv, write_ks_csv,
    write_prevalence_csv, ArtifactReport, AuditReport, ProbeReport, RunManifest, SimulationReport, WeightsReport,
};
use shortcut_audit::synthetic::SyntheticExams;

use crate::output::{ensure_dir, sha256_file, sidecar_path, with_input, write_json, write_text, write_with};
use crate::{CliError, CliResult};

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn load_schema(path: &PathBuf) -> CliResult<AttributeSchema> {
    Ok(AttributeSchema::read(path)?)
}

// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct AuditArgs {
    /// Exam CSV: exam_id,patient_id,score,label,<attributes...>
    #[arg(long)]
    predictions: PathBuf,
    /// Attribute schema JSON.
    #[arg(long)]
    schema: PathBuf,
    /// Attribute to audit, or `all` for every schema attribute.
    #[arg(long)]
    attribute: String,
    /// Bootstrap replicates per interval.
    #[arg(long, default_value_t = 10_000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Resample cancers and non-cancers separately.
    #[arg(long)]
    stratified_bootstrap: bool,
    /// Number of evenly spaced mixing fractions in the composition sweep.
    #[arg(long, default_value_t = 11)]
    fraction_points: usize,
    /// Resampled evaluation sets per composition point.
    #[arg(long, default_value_t = 10)]
    subsets: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

pub fn audit(args: AuditArgs) -> CliResult {
    if args.fraction_points < 2 {
        return Err(invalid("--fraction-points must be at least 2"));
    }
    let schema = load_schema(&args.schema)?;
    let exams = parse_exam_records(&args.predictions)?;
    let selected: Vec<AttributeDef> = if args.attribute == "all" {
        schema.attributes.clone()
    } else {
        vec![schema.get(&args.attribute)?.clone()]
    };

    let validation = validate_against_schema(&exams, &schema);
    if !validation.is_valid() {
        for v in validation.violations.iter().take(10) {
            let what = match &v.kind {
                ViolationKind::MissingAttribute { attribute } => format!("missing attribute `{attribute}`"),
                ViolationKind::UndeclaredValue { attribute, value } => {
                    format!("value `{value}` not declared for `{attribute}`")
                }
                ViolationKind::UndeclaredAttribute { attribute } => format!("column `{attribute}` not in schema"),
            };
            eprintln!("{}: exam {}: {what}", args.predictions.display(), v.exam_id);
        }
        return Err(invalid(format!(
            "{}: {} schema violation(s) against {}",
            args.predictions.display(),
            validation.violations.len(),
            args.schema.display()
        )));
    }

    let settings = AuditSettings {
        bootstrap: BootstrapSettings {
            replicates: args.bootstrap,
            level: args.level,
            seed: args.seed,
            stratified: args.stratified_bootstrap,
        },
        fractions: linspace(0.0, 1.0, args.fraction_points),
        subsets_per_point: args.subsets,
    };
    let attributes = selected
        .iter()
        .map(|attr| audit_attribute(&exams, attr, &settings))
        .collect::<Result<Vec<_>, _>>()?;

    let mut manifest = RunManifest::new("audit")
        .parameter("attribute", &args.attribute)
        .parameter("bootstrap", args.bootstrap)
        .parameter("level", args.level)
        .parameter("stratified_bootstrap", args.stratified_bootstrap)
        .parameter("fraction_points", args.fraction_points)
        .parameter("subsets", args.subsets);
    manifest = with_input(manifest, "predictions", &args.predictions)?;
    manifest.schema_digest = Some(sha256_file(&args.schema)?);
    manifest.seed = Some(args.seed);

    let report = AuditReport {
        manifest,
        settings,
        exam_count: exams.len(),
        unknown_label_count: exams.iter().filter(|e| e.label == Label::Unknown).count(),
        attributes,
    };
    ensure_dir(&args.out)?;
    let json = write_json(&args.out.join("report.json"), &report)?;
    write_text(&args.out.join("report.md"), &render_audit_markdown(&json)?)?;
    let a = &report.attributes;
    write_with(&args.out.join("prevalence.csv"), |w| write_prevalence_csv(w, a))?;
    write_with(&args.out.join("distribution.csv"), |w| write_distribution_csv(w, a))?;
    write_with(&args.out.join("ks.csv"), |w| write_ks_csv(w, a))?;
    write_with(&args.out.join("auc.csv"), |w| write_auc_csv(w, a))?;
    write_with(&args.out.join("composition.csv"), |w| write_composition_csv(w, a))?;

    for audit in a {
        let flag = audit.stratified.as_ref().is_some_and(|s| s.paradox_flag);
        let gap = audit.bias_gap.gap.map_or("n/a".into(), |g| format!("{g:.4}"));
        println!("{}: bias gap {gap}, AUC paradox {}", audit.attribute, if flag { "yes" } else { "no" });
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, ValueEnum)]
pub enum Mode {
    PrevalenceBias,
    P0p1,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Preset {
    /// Coarse grids and small sets; runs in seconds.
    Desk,
    /// Fine grids and large sets; slow.
    Full,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Target AUCs, comma separated (p0p1 mode takes exactly one).
    #[arg(long, value_delimiter = ',', default_value = "0.7")]
    target_auc: Vec<f64>,
    /// Model bias values for p0p1 mode, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.5,1,2")]
    m: Vec<f64>,
    #[arg(long, value_enum, default_value = "desk")]
    preset: Preset,
    /// Override the number of repetitions per cell.
    #[arg(long)]
    repetitions: Option<usize>,
    /// Override the size range, as `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "simulation")]
    out: PathBuf,
}

pub fn simulate(args: SimulateArgs) -> CliResult {
    for &t in &args.target_auc {
        separation_from_auc(t).map_err(|_| invalid(format!("--target-auc {t} must lie strictly between 0 and 1")))?;
    }
    if args.target_auc.is_empty() {
        return Err(invalid("--target-auc needs at least one value"));
    }
    if args.repetitions == Some(0) {
        return Err(invalid("--repetitions must be at least 1"));
    }
    let sizes = match &args.sizes {
        Some(v) if v.len() != 2 => return Err(invalid("--sizes takes two values, `lo,hi`")),
        Some(v) => Some(SizeRange::new(v[0], v[1]).map_err(|e| invalid(e.to_string()))?),
        None => None,
    };
    let full = matches!(args.preset, Preset::Full);

    let (grid, config, crossing_axis): (SweepGrid, serde_json::Value, &str) = match args.mode {
        Mode::PrevalenceBias => {
            let mut c = if full {
                PrevalenceBiasSweep::full(args.target_auc.clone(), args.seed)
            } else {
                PrevalenceBiasSweep::desk(args.target_auc.clone(), args.seed)
            };
            c.repetitions = args.repetitions.unwrap_or(c.repetitions);
            c.sizes = sizes.unwrap_or(c.sizes);
            (run_prevalence_bias_sweep(&c)?, serde_json::to_value(&c).map_err(shortcut_audit::Error::from)?, "prevalence")
        }
        Mode::P0p1 => {
            let [target] = args.target_auc[..] else {
                return Err(invalid("p0p1 mode takes a single --target-auc"));
            };
            if args.m.is_empty() || args.m.iter().any(|m| !m.is_finite()) {
                return Err(invalid("--m needs finite values"));
            }
            let mut c = if full {
                P0P1Sweep::full(target, args.m.clone(), args.seed)
            } else {
                P0P1Sweep::desk(target, args.m.clone(), args.seed)
            };
            c.repetitions = args.repetitions.unwrap_or(c.repetitions);
            c.sizes = sizes.unwrap_or(c.sizes);
            (run_p0p1_sweep(&c)?, serde_json::to_value(&c).map_err(shortcut_audit::Error::from)?, "p1")
        }
    };
    let crossings = find_zero_crossings(&grid);

    ensure_dir(&args.out)?;
    write_with(&args.out.join("grid.csv"), |w| grid.write_csv(w))?;
    write_with(&args.out.join("crossings.csv"), |w| write_crossings_csv(&crossings, &grid, crossing_axis, w))?;
    let mut manifest = RunManifest::new("simulate")
        .parameter("mode", if matches!(args.mode, Mode::P0p1) { "p0p1" } else { "prevalence-bias" })
        .parameter("preset", if full { "full" } else { "desk" })
        .parameter("config", config);
    manifest.seed = Some(args.seed);
    let report = SimulationReport {
        manifest,
        kind: grid.kind,
        axes: grid.axes.clone(),
        repetitions: grid.repetitions,
        cell_count: grid.cells.len(),
        crossing_count: crossings.len(),
        outputs: vec!["grid.csv".into(), "crossings.csv".into()],
    };
    write_json(&args.out.join("report.json"), &report)?;
    println!("{} cells, {} zero crossings, wrote {}", grid.cells.len(), crossings.len(), args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct ProbeArgs {
    /// Training vectors (CSV `id,attribute_label,f0,...` or JSONL).
    #[arg(long)]
    train: PathBuf,
    /// Held-out vectors in the same format.
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    l2: f64,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    /// Report path.
    #[arg(long, default_value = "probe-report.json")]
    out: PathBuf,
}

pub fn probe(args: ProbeArgs) -> CliResult {
    let train = parse_features(&args.train)?;
    let test = parse_features(&args.test)?;
    let config = ProbeConfig {
        l2: args.l2,
        iterations: args.iterations,
    };
    let model = train_probe(&train, &config)?;
    let auc = eval_probe(&model, &test)?;
    let mut manifest = RunManifest::new("probe")
        .parameter("l2", args.l2)
        .parameter("iterations", args.iterations);
    manifest = with_input(manifest, "train", &args.train)?;
    manifest = with_input(manifest, "test", &args.test)?;
    let report = ProbeReport {
        manifest,
        train_size: train.len(),
        test_size: test.len(),
        dimension: model.dimension(),
        l2_penalty: model.l2_penalty,
        iterations_run: model.iterations_run,
        final_loss: *model.loss_history.last().expect("history starts with the initial loss"),
        loss_history: model.loss_history.clone(),
        auc,
    };
    write_json(&args.out, &report)?;
    println!("probe AUC {auc:.4} after {} iterations", model.iterations_run);
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct BalanceArgs {
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    attribute: String,
    /// Schema declaring the attribute's values; without it the values seen
    /// in the data are used.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Weight CSV; a JSON sidecar with the same stem is written next to it.
    #[arg(long, default_value = "weights.csv")]
    out: PathBuf,
}

fn observed_attribute(exams: &[ExamRecord], name: &str) -> CliResult<AttributeDef> {
    let values: std::collections::BTreeSet<&str> = exams.iter().filter_map(|e| e.attribute(name)).collect();
    if values.len() < 2 {
        return Err(invalid(format!("attribute `{name}` has {} distinct value(s) in the data", values.len())));
    }
    Ok(AttributeDef::new(name, &values.into_iter().collect::<Vec<_>>()))
}

pub fn balance(args: BalanceArgs) -> CliResult {
    let sidecar = sidecar_path(&args.out)?;
    let exams = parse_exam_records(&args.predictions)?;
    let mut manifest = RunManifest::new("balance").parameter("attribute", &args.attribute);
    let attr = match &args.schema {
        Some(path) => {
            manifest.schema_digest = Some(sha256_file(path)?);
            load_schema(path)?.get(&args.attribute)?.clone()
        }
        None => observed_attribute(&exams, &args.attribute)?,
    };
    let table = balanced_weights(&exams, &attr)?;
    manifest = with_input(manifest, "predictions", &args.predictions)?;
    write_with(&args.out, |w| table.write_csv(w))?;
    write_json(
        &sidecar,
        &WeightsReport {
            manifest,
            weights: table.sidecar(),
        },
    )?;
    println!(
        "{} weighted exams in {} cells ({} excluded), wrote {}",
        table.rows.len(),
        table.cells.len(),
        table.excluded,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------

fn artifact(manifest: RunManifest, out: &PathBuf, summary: BTreeMap<String, serde_json::Value>) -> CliResult {
    let sidecar = sidecar_path(out)?;
    write_json(
        &sidecar,
        &ArtifactReport {
            manifest,
            outputs: vec![out.display().to_string()],
            summary,
        },
    )?;
    Ok(())
}

#[derive(Args)]
pub struct LabelArgs {
    /// History JSON lines, one exam per line.
    #[arg(long)]
    history: PathBuf,
    #[arg(long, default_value = "labels.csv")]
    out: PathBuf,
}

pub fn label(args: LabelArgs) -> CliResult {
    sidecar_path(&args.out)?;
    let history = parse_history(&args.history)?;
    let labels: Vec<(String, Label)> = history.iter().map(|h| (h.exam_id.clone(), h.label())).collect();
    write_with(&args.out, |w| write_labels(w, &labels))?;
    let count = |l: Label| json!(labels.iter().filter(|(_, x)| *x == l).count());
    let summary = BTreeMap::from([
        ("cancer".to_string(), count(Label::Cancer)),
        ("non_cancer".to_string(), count(Label::NonCancer)),
        ("unknown".to_string(), count(Label::Unknown)),
    ]);
    artifact(with_input(RunManifest::new("label"), "history", &args.history)?, &args.out, summary)?;
    println!("labeled {} exams, wrote {}", labels.len(), args.out.display());
    Ok(())
}

#[derive(Args)]
pub struct AggregateArgs {
    /// Image scores: image_id,exam_id,laterality,view,score
    #[arg(long)]
    images: PathBuf,
    /// Exam metadata: exam_id,patient_id,<attributes...>
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// Labels: exam_id,label (as written by `label`).
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value = "exams.csv")]
    out: PathBuf,
}

pub fn aggregate(args: AggregateArgs) -> CliResult {
    sidecar_path(&args.out)?;
    let images = parse_image_scores(&args.images)?;
    let scores = aggregate_exams(&images)?;
    let mut manifest = with_input(RunManifest::new("aggregate"), "images", &args.images)?;
    let metadata = match &args.metadata {
        Some(p) => {
            manifest = with_input(manifest, "metadata", p)?;
            parse_exam_metadata(p)?
        }
        None => Vec::new(),
    };
    let labels = match &args.labels {
        Some(p) => {
            manifest = with_input(manifest, "labels", p)?;
            parse_labels(p)?
        }
        None => Vec::new(),
    };
    let exams = join_exam_records(&scores, &metadata, &labels);
    write_with(&args.out, |w| write_exam_records(w, &exams))?;
    let summary = BTreeMap::from([
        ("images".to_string(), json!(images.len())),
        ("exams".to_string(), json!(exams.len())),
    ]);
    artifact(manifest, &args.out, summary)?;
    println!("{} images -> {} exams, wrote {}", images.len(), exams.len(), args.out.display());
    Ok(())
}

#[derive(Args)]
pub struct FilterArgs {
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    attribute: String,
    /// Value to keep, e.g. `screening`.
    #[arg(long)]
    keep: String,
    #[arg(long)]
    out: PathBuf,
}

pub fn filter(args: FilterArgs) -> CliResult {
    sidecar_path(&args.out)?;
    let exams = parse_exam_records(&args.predictions)?;
    let outcome = filter_by_attribute(&exams, &args.attribute, &args.keep);
    if !outcome.keep_value_present {
        eprintln!("warning: no exam has {}={}; output is empty", args.attribute, args.keep);
    }
    write_with(&args.out, |w| write_exam_records(w, &outcome.kept))?;
    let manifest = with_input(
        RunManifest::new("filter")
            .parameter("attribute", &args.attribute)
            .parameter("keep", &args.keep),
        "predictions",
        &args.predictions,
    )?;
    let summary = BTreeMap::from([
        ("kept".to_string(), json!(outcome.kept.len())),
        ("removed".to_string(), json!(outcome.removed)),
        ("keep_value_present".to_string(), json!(outcome.keep_value_present)),
    ]);
    artifact(manifest, &args.out, summary)?;
    println!("kept {}, removed {}, wrote {}", outcome.kept.len(), outcome.removed, args.out.display());
    Ok(())
}

#[derive(Args)]
pub struct MatchArgs {
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    attribute: String,
    /// Cancer prevalence every attribute value is downsampled to.
    #[arg(long)]
    target: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

pub fn match_prevalence(args: MatchArgs) -> CliResult {
    sidecar_path(&args.out)?;
    let exams = parse_exam_records(&args.predictions)?;
    let matched = prevalence_matched_eval(&exams, &args.attribute, args.target, args.seed).map_err(|e| match e {
        shortcut_audit::Error::UnreachablePrevalence { .. } => invalid(e.to_string()),
        other => other.into(),
    })?;
    write_with(&args.out, |w| write_exam_records(w, &matched.exams))?;
    let mut manifest = RunManifest::new("match")
        .parameter("attribute", &args.attribute)
        .parameter("target", args.target);
    manifest.seed = Some(args.seed);
    manifest = with_input(manifest, "predictions", &args.predictions)?;
    let summary = BTreeMap::from([
        ("per_value".to_string(), json!(matched.per_value)),
        ("dropped".to_string(), json!(matched.dropped)),
        ("exams".to_string(), json!(matched.exams.len())),
    ]);
    artifact(manifest, &args.out, summary)?;
    println!("{} exams at prevalence {}, wrote {}", matched.exams.len(), args.target, args.out.display());
    Ok(())
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0.7)]
    target_auc: f64,
    /// Score shift of the second attribute value.
    #[arg(long, default_value_t = 0.0)]
    m: f64,
    /// Cancer prevalence of the two values, `p0,p1`.
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.8])]
    prevalence: Vec<f64>,
    /// Exams per value, `n0,n1`.
    #[arg(long, value_delimiter = ',', default_values_t = [1000, 1000])]
    size: Vec<usize>,
    #[arg(long, default_value = "group")]
    attribute: String,
    /// The two attribute values.
    #[arg(long, value_delimiter = ',', default_values_t = ["A".to_string(), "B".to_string()])]
    values: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exam CSV; the matching schema is written as `<stem>.schema.json`.
    #[arg(long, default_value = "synthetic.csv")]
    out: PathBuf,
}

pub fn synth(args: SynthArgs) -> CliResult {
    for (flag, n) in [("--prevalence", args.prevalence.len()), ("--size", args.size.len()), ("--values", args.values.len())] {
        if n != 2 {
            return Err(invalid(format!("{flag} takes two comma-separated values")));
        }
    }
    let mut syn = SyntheticExams::new(BinormalSpec {
        target_auc: args.target_auc,
        bias_m: args.m,
        prevalence_set0: args.prevalence[0],
        prevalence_set1: args.prevalence[1],
        n_set0: args.size[0],
        n_set1: args.size[1],
        seed: args.seed,
    });
    if args.values[0] == args.values[1] {
        return Err(invalid("--values needs two different values"));
    }
    syn.attribute = args.attribute.clone();
    syn.values = [args.values[0].clone(), args.values[1].clone()];
    syn.probability_scores = true;
    let exams = syn.generate()?;
    write_with(&args.out, |w| write_exam_records(w, &exams))?;
    let schema = AttributeSchema::new(vec![syn.attribute_def()])?;
    let schema_path = args.out.with_extension("schema.json");
    write_json(&schema_path, &schema)?;
    println!("{} exams, wrote {} and {}", exams.len(), args.out.display(), schema_path.display());
    Ok(())
}
