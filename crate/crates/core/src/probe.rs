//! Logistic-regression attribute probe.
//!
//! Fits an L2-regularized logistic regression that predicts a binary
//! attribute from a model's feature vectors; a high held-out AUC means the
//! representation encodes the attribute.
//!
//! Features are standardized with the training mean and standard deviation
//! (floored at 1e-8), and the objective
//!
//! ```text
//! J(w, b) = (1/n) * ( Σ log(1 + exp(-y_i (w·x_i + b))) + (λ/2) ||w||² )
//! ```
//!
//! is minimized by full-batch gradient descent with an Armijo backtracking
//! line search, so the loss never increases. The intercept is not
//! penalized. With λ = 1/C this is the objective of the usual `C`-style
//! logistic regression.

use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::auc;

/// Rows per block of the gradient reduction. Fixed so the summation order,
/// and with it every bit of the result, does not depend on threads.
const BLOCK_ROWS: usize = 256;
const ARMIJO_C: f64 = 1e-4;
const GRADIENT_TOL: f64 = 1e-8;
const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVectorRecord {
    pub id: String,
    pub vector: Vec<f64>,
    pub attribute_label: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub l2: f64,
    pub iterations: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            l2: 1.0,
            iterations: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub mean: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub l2_penalty: f64,
    pub iterations_run: usize,
    pub standardization: Vec<FeatureScaling>,
    /// Objective value before the first step and after each iteration.
    pub loss_history: Vec<f64>,
}

impl ProbeModel {
    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    /// Probability that `vector` carries the positive attribute value.
    pub fn predict(&self, vector: &[f64]) -> f64 {
        let z: f64 = vector
            .iter()
            .zip(&self.standardization)
            .zip(&self.weights)
            .map(|((x, s), w)| w * (x - s.mean) / s.scale)
            .sum::<f64>()
            + self.intercept;
        sigmoid(z)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(x)) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn check_dimensions(records: &[FeatureVectorRecord], dim: Option<usize>) -> Result<usize> {
    let dim = dim.or_else(|| records.first().map(|r| r.vector.len())).unwrap_or(0);
    if dim == 0 {
        return Err(Error::InvalidParameter("feature vectors are empty".into()));
    }
    for r in records {
        if r.vector.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "record `{}` has dimension {}, expected {dim}",
                r.id,
                r.vector.len()
            )));
        }
        if r.vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("record `{}` has a non-finite entry", r.id)));
        }
    }
    Ok(dim)
}

/// Standardized design matrix, row-major.
struct Design {
    x: Vec<f64>,
    y: Vec<f64>,
    n: usize,
    d: usize,
}

impl Design {
    fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    /// Objective and gradient (weights then intercept).
    fn evaluate(&self, w: &[f64], b: f64, l2: f64, want_grad: bool) -> (f64, Vec<f64>) {
        let d = self.d;
        let blocks: Vec<(f64, Vec<f64>)> = (0..self.n.div_ceil(BLOCK_ROWS))
            .into_par_iter()
            .map(|blk| {
                let mut loss = 0.0;
                let mut grad = if want_grad { vec![0.0; d + 1] } else { Vec::new() };
                for i in blk * BLOCK_ROWS..((blk + 1) * BLOCK_ROWS).min(self.n) {
                    let row = self.row(i);
                    let z = row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() + b;
                    let y = self.y[i];
                    // y in {0, 1}: loss = softplus(z) - y z
                    loss += if y > 0.5 { softplus(-z) } else { softplus(z) };
                    if want_grad {
                        let r = sigmoid(z) - y;
                        for (g, x) in grad.iter_mut().zip(row) {
                            *g += r * x;
                        }
                        grad[d] += r;
                    }
                }
                (loss, grad)
            })
            .collect();
        let (loss, mut grad) = pairwise_sum(blocks);
        let n = self.n as f64;
        let penalty = 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
        if want_grad {
            for (g, wj) in grad.iter_mut().zip(w) {
                *g = (*g + l2 * wj) / n;
            }
            grad[d] /= n;
        }
        ((loss + penalty) / n, grad)
    }
}

/// Tree reduction in a fixed order.
fn pairwise_sum(mut parts: Vec<(f64, Vec<f64>)>) -> (f64, Vec<f64>) {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some((la, mut ga)) = it.next() {
            if let Some((lb, gb)) = it.next() {
                for (a, b) in ga.iter_mut().zip(&gb) {
                    *a += b;
                }
                next.push((la + lb, ga));
            } else {
                next.push((la, ga));
            }
        }
        parts = next;
    }
    parts.pop().unwrap_or((0.0, Vec::new()))
}

pub fn train_probe(train: &[FeatureVectorRecord], config: &ProbeConfig) -> Result<ProbeModel> {
    if !(config.l2 >= 0.0 && config.l2.is_finite()) {
        return Err(Error::InvalidParameter(format!("l2 penalty {} must be non-negative", config.l2)));
    }
    let d = check_dimensions(train, None)?;
    let positives = train.iter().filter(|r| r.attribute_label).count();
    if positives == 0 || positives == train.len() {
        return Err(Error::InvalidParameter("probe training needs both attribute labels".into()));
    }
    let n = train.len();

    let standardization: Vec<FeatureScaling> = (0..d)
        .map(|j| {
            let mean = train.iter().map(|r| r.vector[j]).sum::<f64>() / n as f64;
            let var = train.iter().map(|r| (r.vector[j] - mean).powi(2)).sum::<f64>() / n as f64;
            FeatureScaling {
                mean,
                scale: var.sqrt().max(STD_FLOOR),
            }
        })
        .collect();
    let design = Design {
        x: train
            .iter()
            .flat_map(|r| r.vector.iter().zip(&standardization).map(|(x, s)| (x - s.mean) / s.scale))
            .collect(),
        y: train.iter().map(|r| if r.attribute_label { 1.0 } else { 0.0 }).collect(),
        n,
        d,
    };

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let (mut loss, mut grad) = design.evaluate(&w, b, config.l2, true);
    let mut history = vec![loss];
    let mut step = 1.0;
    let mut iterations_run = 0;
    for _ in 0..config.iterations {
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if g2.sqrt() < GRADIENT_TOL {
            break;
        }
        step *= 2.0;
        let mut accepted = None;
        for _ in 0..60 {
            let w_try: Vec<f64> = w.iter().zip(&grad).map(|(w, g)| w - step * g).collect();
            let b_try = b - step * grad[d];
            let (l_try, _) = design.evaluate(&w_try, b_try, config.l2, false);
            if l_try <= loss - ARMIJO_C * step * g2 {
                accepted = Some((w_try, b_try));
                break;
            }
            step *= 0.5;
        }
        let Some((w_new, b_new)) = accepted else { break };
        w = w_new;
        b = b_new;
        (loss, grad) = design.evaluate(&w, b, config.l2, true);
        history.push(loss);
        iterations_run += 1;
    }

    Ok(ProbeModel {
        weights: w,
        intercept: b,
        l2_penalty: config.l2,
        iterations_run,
        standardization,
        loss_history: history,
    })
}

/// Held-out AUC of the probe.
pub fn eval_probe(model: &ProbeModel, test: &[FeatureVectorRecord]) -> Result<f64> {
    check_dimensions(test, Some(model.dimension()))?;
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for r in test {
        let s = model.predict(&r.vector);
        if r.attribute_label {
            pos.push(s);
        } else {
            neg.push(s);
        }
    }
    auc(&pos, &neg)
}

fn parse_label(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}

fn feature_error(source: &str, line: u64, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Reads `id,attribute_label,f0,f1,...` rows. The dimension is fixed by
/// the header.
pub fn read_feature_csv<R: Read>(reader: R, source: &str) -> Result<Vec<FeatureVectorRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "id" || &header[1] != "attribute_label" {
        return Err(feature_error(source, 1, "header", "expected `id,attribute_label,f0,...`"));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            feature_error(source, line, "row", e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let attribute_label = parse_label(&row[1])
            .ok_or_else(|| feature_error(source, line, "attribute_label", format!("`{}` is not 0/1", &row[1])))?;
        let vector = row
            .iter()
            .skip(2)
            .zip(header.iter().skip(2))
            .map(|(v, col)| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| feature_error(source, line, col, format!("`{v}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(FeatureVectorRecord {
            id: row[0].to_string(),
            vector,
            attribute_label,
        });
    }
    Ok(out)
}

/// Reads JSON lines `{"id": ..., "attribute_label": 0|1|bool, "vector": [...]}`.
/// The dimension is taken from the first record.
pub fn read_feature_jsonl<R: Read>(reader: R, source: &str) -> Result<Vec<FeatureVectorRecord>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum RawLabel {
        Bool(bool),
        Int(u8),
    }
    #[derive(Deserialize)]
    struct Raw {
        id: String,
        attribute_label: RawLabel,
        vector: Vec<f64>,
    }

    let mut out: Vec<FeatureVectorRecord> = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: Raw = serde_json::from_str(&line)
            .map_err(|e| feature_error(source, line_no, &format!("column {}", e.column()), e.to_string()))?;
        let attribute_label = match raw.attribute_label {
            RawLabel::Bool(b) => b,
            RawLabel::Int(0) => false,
            RawLabel::Int(1) => true,
            RawLabel::Int(v) => return Err(feature_error(source, line_no, "attribute_label", format!("{v} is not 0/1"))),
        };
        if let Some(first) = out.first() {
            if first.vector.len() != raw.vector.len() {
                return Err(feature_error(
                    source,
                    line_no,
                    "vector",
                    format!("dimension {} differs from {}", raw.vector.len(), first.vector.len()),
                ));
            }
        }
        out.push(FeatureVectorRecord {
            id: raw.id,
            vector: raw.vector,
            attribute_label,
        });
    }
    Ok(out)
}

/// Reads a feature file, choosing JSONL for `.jsonl`/`.json` and CSV
/// otherwise.
pub fn parse_features(path: impl AsRef<Path>) -> Result<Vec<FeatureVectorRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let source = path.display().to_string();
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl" | "json") => read_feature_jsonl(file, &source),
        _ => read_feature_csv(file, &source),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(i: usize, vector: Vec<f64>, label: bool) -> FeatureVectorRecord {
        FeatureVectorRecord {
            id: format!("r{i}"),
            vector,
            attribute_label: label,
        }
    }

    fn label_feature() -> Vec<FeatureVectorRecord> {
        (0..40).map(|i| rec(i, vec![(i % 2) as f64], i % 2 == 1)).collect()
    }

    #[test]
    fn separable_single_feature() {
        let data = label_feature();
        let model = train_probe(&data, &ProbeConfig::default()).unwrap();
        assert_eq!(eval_probe(&model, &data).unwrap(), 1.0);
        assert!(model.loss_history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(model.loss_history.len(), model.iterations_run + 1);
    }

    #[test]
    fn huge_penalty_pins_weights_near_zero() {
        let data: Vec<_> = (0..40).map(|i| rec(i, vec![(i % 2) as f64 + 0.1 * (i % 3) as f64], i % 2 == 1)).collect();
        let model = train_probe(&data, &ProbeConfig { l2: 1e6, iterations: 500 }).unwrap();
        assert!(model.weights[0].abs() < 1e-4, "{:?}", model.weights);
        for r in &data {
            assert!((model.predict(&r.vector) - 0.5).abs() < 1e-3);
        }
    }

    #[test]
    fn zero_weights_tie_everything() {
        let model = ProbeModel {
            weights: vec![0.0, 0.0],
            intercept: 0.3,
            l2_penalty: 1.0,
            iterations_run: 0,
            standardization: vec![FeatureScaling { mean: 0.0, scale: 1.0 }; 2],
            loss_history: vec![],
        };
        let test = vec![rec(0, vec![1.0, 2.0], true), rec(1, vec![-1.0, 0.0], false), rec(2, vec![5.0, 5.0], false)];
        assert_eq!(eval_probe(&model, &test).unwrap(), 0.5);
    }

    #[test]
    fn input_errors() {
        let one_class: Vec<_> = (0..5).map(|i| rec(i, vec![i as f64], true)).collect();
        assert!(train_probe(&one_class, &ProbeConfig::default()).is_err());
        let mut mixed = label_feature();
        mixed[3].vector.push(1.0);
        assert!(train_probe(&mixed, &ProbeConfig::default()).is_err());
        let model = train_probe(&label_feature(), &ProbeConfig::default()).unwrap();
        assert!(matches!(eval_probe(&model, &one_class), Err(Error::Undefined(_))));
        assert!(eval_probe(&model, &[rec(0, vec![1.0, 2.0], true)]).is_err());
    }

    #[test]
    fn constant_feature_uses_floored_scale() {
        let data: Vec<_> = (0..20).map(|i| rec(i, vec![3.0, (i % 2) as f64], i % 2 == 0)).collect();
        let model = train_probe(&data, &ProbeConfig::default()).unwrap();
        assert_eq!(model.standardization[0].scale, STD_FLOOR);
        assert_eq!(model.weights[0], 0.0);
    }

    #[test]
    fn bit_identical_across_threads() {
        let data: Vec<_> = (0..1000)
            .map(|i| rec(i, vec![((i * 37) % 101) as f64 / 50.0, ((i * 11) % 7) as f64], (i * 13) % 5 < 2))
            .collect();
        let cfg = ProbeConfig { l2: 0.5, iterations: 50 };
        let a = train_probe(&data, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let b = pool.install(|| train_probe(&data, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn readers() {
        let csv = "id,attribute_label,f0,f1\na,1,0.5,1\nb,0,0.25,-2\n";
        let recs = read_feature_csv(csv.as_bytes(), "mem").unwrap();
        assert_eq!(recs[1], rec(0, vec![0.25, -2.0], false).with_id("b"));
        assert!(read_feature_csv("id,attribute_label,f0\na,2,0.5\n".as_bytes(), "mem").is_err());
        assert!(read_feature_csv("id,attribute_label,f0\na,1,x\n".as_bytes(), "mem").is_err());

        let jsonl = "{\"id\":\"a\",\"attribute_label\":true,\"vector\":[1,2]}\n{\"id\":\"b\",\"attribute_label\":0,\"vector\":[3,4]}\n";
        let recs = read_feature_jsonl(jsonl.as_bytes(), "mem").unwrap();
        assert_eq!(recs.len(), 2);
        assert!(!recs[1].attribute_label);
        let bad = "{\"id\":\"a\",\"attribute_label\":1,\"vector\":[1,2]}\n{\"id\":\"b\",\"attribute_label\":0,\"vector\":[3]}\n";
        assert!(matches!(read_feature_jsonl(bad.as_bytes(), "mem"), Err(Error::Parse { line: 2, .. })));
    }

    impl FeatureVectorRecord {
        fn with_id(mut self, id: &str) -> Self {
            self.id = id.into();
            self
        }
    }
}
