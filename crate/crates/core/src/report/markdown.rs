use std::fmt::Write;

use super::AuditReport;
use crate::audit::{AttributeAudit, ClassSummary, Estimate};
use crate::error::Result;
use crate::metrics::ConfidenceInterval;

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.4}"))
}

fn ci(c: &ConfidenceInterval) -> String {
    format!("{:.4} [{:.4}, {:.4}]", c.point, c.lower, c.upper)
}

fn estimate(e: &Estimate) -> String {
    match e {
        Estimate::Defined(c) => ci(c),
        Estimate::Undefined { reason } => format!("undefined ({reason})"),
    }
}

fn summary_cells(s: &ClassSummary) -> String {
    let q = s.quartiles;
    format!(
        "{} | {} | {} | {} | {} | {}",
        s.count,
        num(s.min),
        num(q.map(|q| q.q1)),
        num(q.map(|q| q.median)),
        num(q.map(|q| q.q3)),
        num(s.max)
    )
}

/// Renders the Markdown summary from the JSON text of an audit report.
pub fn render_audit_markdown(report_json: &str) -> Result<String> {
    let report: AuditReport = serde_json::from_str(report_json)?;
    let mut md = String::new();
    let m = &report.manifest;
    let _ = writeln!(md, "# Shortcut audit\n");
    let _ = writeln!(md, "- tool: {} {}", m.tool, m.version);
    for input in &m.inputs {
        let _ = writeln!(md, "- {}: `{}` (sha256 {})", input.role, input.path, input.sha256);
    }
    if let Some(seed) = m.seed {
        let _ = writeln!(md, "- seed: {seed}");
    }
    let _ = writeln!(
        md,
        "- bootstrap: {} replicates, {:.0}% percentile intervals",
        report.settings.bootstrap.replicates,
        100.0 * report.settings.bootstrap.level
    );
    let _ = writeln!(
        md,
        "- exams: {} ({} with unknown label, excluded)\n",
        report.exam_count, report.unknown_label_count
    );
    for audit in &report.attributes {
        attribute_section(&mut md, audit);
    }
    Ok(md)
}

fn attribute_section(md: &mut String, a: &AttributeAudit) {
    let source = match a.high_value.source {
        crate::audit::HighValueSource::Schema => "declared",
        crate::audit::HighValueSource::Empirical => "estimated from data",
    };
    let _ = writeln!(md, "## Attribute `{}`\n", a.attribute);
    let _ = writeln!(md, "High-prevalence value: `{}` ({source})\n", a.high_value.value);

    let _ = writeln!(md, "### Prevalence\n");
    let _ = writeln!(md, "| value | positives | total | prevalence |\n|---|---|---|---|");
    for r in &a.prevalence.rows {
        let _ = writeln!(md, "| {} | {} | {} | {:.4} |", r.value, r.positive_count, r.total_count, r.prevalence);
    }
    if !a.prevalence.empty_values.is_empty() {
        let _ = writeln!(md, "\nValues without labeled exams: {}", a.prevalence.empty_values.join(", "));
    }
    if a.prevalence.unassigned > 0 {
        let _ = writeln!(md, "\nLabeled exams without this attribute: {}", a.prevalence.unassigned);
    }

    let _ = writeln!(md, "\n### Score distributions\n");
    let _ = writeln!(md, "| value | label | n | min | q1 | median | q3 | max |\n|---|---|---|---|---|---|---|---|");
    for v in &a.distribution.values {
        let _ = writeln!(md, "| {} | cancer | {} |", v.value, summary_cells(&v.positives));
        let _ = writeln!(md, "| {} | non-cancer | {} |", v.value, summary_cells(&v.negatives));
    }
    if !a.distribution.ks.is_empty() {
        let _ = writeln!(md, "\n| pair | KS cancer | KS non-cancer |\n|---|---|---|");
        for k in &a.distribution.ks {
            let _ = writeln!(md, "| {} vs {} | {} | {} |", k.value_a, k.value_b, num(k.positives), num(k.negatives));
        }
    }

    let g = &a.bias_gap;
    let _ = writeln!(md, "\n### Bias-aligned versus bias-conflicting\n");
    let _ = writeln!(md, "| subset | positives | negatives | AUC [CI] |\n|---|---|---|---|");
    let _ = writeln!(
        md,
        "| aligned | {} | {} | {} |",
        g.aligned_counts.positives,
        g.aligned_counts.negatives,
        estimate(&g.aligned_auc)
    );
    let _ = writeln!(
        md,
        "| conflicting | {} | {} | {} |",
        g.conflicting_counts.positives,
        g.conflicting_counts.negatives,
        estimate(&g.conflicting_auc)
    );
    let _ = writeln!(md, "\nGap (aligned minus conflicting): {}", num(g.gap));

    if let Some(s) = &a.stratified {
        let _ = writeln!(md, "\n### Stratified AUC\n");
        let _ = writeln!(md, "| stratum | positives | negatives | AUC [CI] |\n|---|---|---|---|");
        for st in &s.strata {
            let _ = writeln!(md, "| {} | {} | {} | {} |", st.value, st.counts.positives, st.counts.negatives, estimate(&st.auc));
        }
        let _ = writeln!(md, "| combined | | | {} |", ci(&s.combined));
        let _ = writeln!(
            md,
            "\nAUC paradox: {}",
            if s.paradox_flag { "yes, the combined AUC exceeds every stratum" } else { "no" }
        );
    }

    let c = &a.composition;
    let _ = writeln!(md, "\n### Composition sweep\n");
    let _ = writeln!(
        md,
        "Evaluation size {}, {} subsets per point.\n",
        c.evaluation_size, c.subsets_per_point
    );
    let _ = writeln!(md, "| fraction `{}` | n high | n rest | mean AUC | std |\n|---|---|---|---|---|", c.high_value);
    for p in &c.points {
        let _ = writeln!(
            md,
            "| {:.2} | {} | {} | {} | {} |",
            p.fraction,
            p.n_high,
            p.n_rest,
            num(p.mean_auc),
            num(p.std_auc)
        );
    }
    if !a.notes.is_empty() {
        let _ = writeln!(md, "\n### Notes\n");
        for n in &a.notes {
            let _ = writeln!(md, "- {n}");
        }
    }
    md.push('\n');
}
