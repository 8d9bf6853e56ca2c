//! Flat CSV tables for plotting. Empty fields mean "undefined".

use std::io::Write;

use crate::audit::{AttributeAudit, ClassSummary, Estimate};
use crate::error::{Error, Result};

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<plot csv>", e))
}

/// `attribute,value,positives,total,prevalence`
pub fn write_prevalence_csv<W: Write>(writer: W, audits: &[AttributeAudit]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["attribute", "value", "positives", "total", "prevalence"])?;
    for a in audits {
        for r in &a.prevalence.rows {
            w.write_record([
                a.attribute.clone(),
                r.value.clone(),
                r.positive_count.to_string(),
                r.total_count.to_string(),
                r.prevalence.to_string(),
            ])?;
        }
    }
    finish(w)
}

/// `attribute,value,label,count,min,q1,median,q3,max,mean`, one box per row.
pub fn write_distribution_csv<W: Write>(writer: W, audits: &[AttributeAudit]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["attribute", "value", "label", "count", "min", "q1", "median", "q3", "max", "mean"])?;
    let row = |a: &str, v: &str, label: &str, s: &ClassSummary| {
        let q = s.quartiles;
        vec![
            a.to_string(),
            v.to_string(),
            label.to_string(),
            s.count.to_string(),
            opt(s.min),
            opt(q.map(|q| q.q1)),
            opt(q.map(|q| q.median)),
            opt(q.map(|q| q.q3)),
            opt(s.max),
            opt(s.mean),
        ]
    };
    for a in audits {
        for v in &a.distribution.values {
            w.write_record(row(&a.attribute, &v.value, "cancer", &v.positives))?;
            w.write_record(row(&a.attribute, &v.value, "non_cancer", &v.negatives))?;
        }
    }
    finish(w)
}

/// `attribute,value_a,value_b,label,ks`
pub fn write_ks_csv<W: Write>(writer: W, audits: &[AttributeAudit]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["attribute", "value_a", "value_b", "label", "ks"])?;
    for a in audits {
        for k in &a.distribution.ks {
            for (label, v) in [("cancer", k.positives), ("non_cancer", k.negatives)] {
                w.write_record([a.attribute.clone(), k.value_a.clone(), k.value_b.clone(), label.into(), opt(v)])?;
            }
        }
    }
    finish(w)
}

/// `attribute,subset,value,positives,negatives,auc,ci_lower,ci_upper`.
///
/// `subset` is `aligned`, `conflicting`, `stratum` (with `value` set) or
/// `combined`.
pub fn write_auc_csv<W: Write>(writer: W, audits: &[AttributeAudit]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["attribute", "subset", "value", "positives", "negatives", "auc", "ci_lower", "ci_upper"])?;
    let fields = |e: &Estimate| {
        let ci = e.interval();
        [opt(ci.map(|c| c.point)), opt(ci.map(|c| c.lower)), opt(ci.map(|c| c.upper))]
    };
    for a in audits {
        let g = &a.bias_gap;
        for (subset, counts, est) in [
            ("aligned", g.aligned_counts, &g.aligned_auc),
            ("conflicting", g.conflicting_counts, &g.conflicting_auc),
        ] {
            let [p, lo, hi] = fields(est);
            w.write_record([
                a.attribute.clone(),
                subset.into(),
                String::new(),
                counts.positives.to_string(),
                counts.negatives.to_string(),
                p,
                lo,
                hi,
            ])?;
        }
        if let Some(s) = &a.stratified {
            for st in &s.strata {
                let [p, lo, hi] = fields(&st.auc);
                w.write_record([
                    a.attribute.clone(),
                    "stratum".into(),
                    st.value.clone(),
                    st.counts.positives.to_string(),
                    st.counts.negatives.to_string(),
                    p,
                    lo,
                    hi,
                ])?;
            }
            let pos: usize = s.strata.iter().map(|st| st.counts.positives).sum();
            let neg: usize = s.strata.iter().map(|st| st.counts.negatives).sum();
            w.write_record([
                a.attribute.clone(),
                "combined".into(),
                String::new(),
                pos.to_string(),
                neg.to_string(),
                s.combined.point.to_string(),
                s.combined.lower.to_string(),
                s.combined.upper.to_string(),
            ])?;
        }
    }
    finish(w)
}

/// `attribute,high_value,fraction,n_high,n_rest,defined_subsets,mean_auc,std_auc`
pub fn write_composition_csv<W: Write>(writer: W, audits: &[AttributeAudit]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "attribute",
        "high_value",
        "fraction",
        "n_high",
        "n_rest",
        "defined_subsets",
        "mean_auc",
        "std_auc",
    ])?;
    for a in audits {
        let c = &a.composition;
        for p in &c.points {
            w.write_record([
                a.attribute.clone(),
                c.high_value.clone(),
                p.fraction.to_string(),
                p.n_high.to_string(),
                p.n_rest.to_string(),
                p.defined_subsets.to_string(),
                opt(p.mean_auc),
                opt(p.std_auc),
            ])?;
        }
    }
    finish(w)
}
