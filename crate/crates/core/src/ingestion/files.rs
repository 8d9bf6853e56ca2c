//! File formats.
//!
//! * image scores: `image_id,exam_id,laterality,view,score`
//! * exams: `exam_id,patient_id,score,label,<attr1>,<attr2>,...`
//! * exam metadata: `exam_id,patient_id,<attr1>,...`
//! * labels: `exam_id,label`
//! * history: JSON lines, see [`HistoryEntry`]
//!
//! Line numbers in errors are 1-based physical lines, the header being
//! line 1.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::labeling::HistoryEntry;
use super::records::{ExamRecord, ImageScoreRecord, Label, Laterality};
use crate::error::{Error, Result};

const IMAGE_HEADER: [&str; 5] = ["image_id", "exam_id", "laterality", "view", "score"];
const EXAM_HEADER: [&str; 4] = ["exam_id", "patient_id", "score", "label"];

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn parse_error(source: &str, line: u64, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn check_header(
    source: &str,
    header: &csv::StringRecord,
    expected: &[&str],
    exact: bool,
) -> Result<()> {
    let ok = header.len() >= expected.len()
        && (!exact || header.len() == expected.len())
        && expected.iter().zip(header.iter()).all(|(e, h)| *e == h);
    if ok {
        Ok(())
    } else {
        let found: Vec<&str> = header.iter().collect();
        Err(parse_error(
            source,
            1,
            "header",
            format!("expected `{}`, found `{}`", expected.join(","), found.join(",")),
        ))
    }
}

fn parse_score(source: &str, line: u64, raw: &str) -> Result<f64> {
    let value: f64 = raw
        .parse()
        .map_err(|_| parse_error(source, line, "score", format!("`{raw}` is not a number")))?;
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(Error::ScoreOutOfRange {
            path: source.to_string(),
            line,
            value: raw.to_string(),
        });
    }
    Ok(value)
}

fn row_error(source: &str, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    parse_error(source, line, "row", err.to_string())
}

/// Reads an image-score CSV from `path`.
pub fn parse_image_scores(path: impl AsRef<Path>) -> Result<Vec<ImageScoreRecord>> {
    let path = path.as_ref();
    read_image_scores(open(path)?, &path.display().to_string())
}

/// Reads an image-score CSV; `source` names the input in error messages.
pub fn read_image_scores<R: Read>(reader: R, source: &str) -> Result<Vec<ImageScoreRecord>> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(|e| row_error(source, e))?.clone();
    check_header(source, &header, &IMAGE_HEADER, true)?;

    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| row_error(source, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let image_id = row[0].to_string();
        if image_id.is_empty() {
            return Err(parse_error(source, line, "image_id", "empty image id"));
        }
        if row[1].is_empty() {
            return Err(parse_error(source, line, "exam_id", "empty exam id"));
        }
        if !seen.insert(image_id.clone()) {
            return Err(parse_error(source, line, "image_id", format!("duplicate image id `{image_id}`")));
        }
        let laterality: Laterality = row[2]
            .parse()
            .map_err(|msg: String| parse_error(source, line, "laterality", msg))?;
        records.push(ImageScoreRecord {
            image_id,
            exam_id: row[1].to_string(),
            laterality,
            view: row[3].to_string(),
            score: parse_score(source, line, &row[4])?,
        });
    }
    Ok(records)
}

/// Reads an exam CSV from `path`.
pub fn parse_exam_records(path: impl AsRef<Path>) -> Result<Vec<ExamRecord>> {
    let path = path.as_ref();
    read_exam_records(open(path)?, &path.display().to_string())
}

/// Reads an exam CSV. Columns after `label` are attributes; an empty cell
/// leaves that attribute unset so schema validation reports it.
pub fn read_exam_records<R: Read>(reader: R, source: &str) -> Result<Vec<ExamRecord>> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(|e| row_error(source, e))?.clone();
    check_header(source, &header, &EXAM_HEADER, false)?;
    let attribute_names: Vec<String> = header.iter().skip(EXAM_HEADER.len()).map(String::from).collect();

    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| row_error(source, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let exam_id = row[0].to_string();
        if exam_id.is_empty() {
            return Err(parse_error(source, line, "exam_id", "empty exam id"));
        }
        if !seen.insert(exam_id.clone()) {
            return Err(parse_error(source, line, "exam_id", format!("duplicate exam id `{exam_id}`")));
        }
        let label: Label = row[3]
            .parse()
            .map_err(|msg: String| parse_error(source, line, "label", msg))?;
        let attributes: BTreeMap<String, String> = attribute_names
            .iter()
            .zip(row.iter().skip(EXAM_HEADER.len()))
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect();
        records.push(ExamRecord {
            exam_id,
            patient_id: row[1].to_string(),
            score: parse_score(source, line, &row[2])?,
            label,
            attributes,
        });
    }
    Ok(records)
}

/// Writes exams in the exam CSV format. Attribute columns are the union of
/// keys present, in sorted order.
pub fn write_exam_records<W: Write>(writer: W, exams: &[ExamRecord]) -> Result<()> {
    let columns: std::collections::BTreeSet<&str> = exams
        .iter()
        .flat_map(|e| e.attributes.keys().map(String::as_str))
        .collect();
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(EXAM_HEADER.iter().copied().chain(columns.iter().copied()))?;
    for exam in exams {
        let score = exam.score.to_string();
        let mut row = vec![exam.exam_id.as_str(), exam.patient_id.as_str(), score.as_str(), exam.label.as_str()];
        row.extend(columns.iter().map(|c| exam.attribute(c).unwrap_or("")));
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

const METADATA_HEADER: [&str; 2] = ["exam_id", "patient_id"];
const LABEL_HEADER: [&str; 2] = ["exam_id", "label"];

/// Per-exam patient id and attributes, without a score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExamMetadata {
    pub exam_id: String,
    pub patient_id: String,
    pub attributes: BTreeMap<String, String>,
}

pub fn parse_exam_metadata(path: impl AsRef<Path>) -> Result<Vec<ExamMetadata>> {
    let path = path.as_ref();
    read_exam_metadata(open(path)?, &path.display().to_string())
}

/// Reads `exam_id,patient_id,<attr1>,...`.
pub fn read_exam_metadata<R: Read>(reader: R, source: &str) -> Result<Vec<ExamMetadata>> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(|e| row_error(source, e))?.clone();
    check_header(source, &header, &METADATA_HEADER, false)?;
    let names: Vec<String> = header.iter().skip(2).map(String::from).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| row_error(source, e))?;
        let line = row.position().map_or(0, |p| p.line());
        if !seen.insert(row[0].to_string()) {
            return Err(parse_error(source, line, "exam_id", format!("duplicate exam id `{}`", &row[0])));
        }
        out.push(ExamMetadata {
            exam_id: row[0].to_string(),
            patient_id: row[1].to_string(),
            attributes: names
                .iter()
                .zip(row.iter().skip(2))
                .filter(|(_, v)| !v.is_empty())
                .map(|(k, v)| (k.clone(), v.to_string()))
                .collect(),
        });
    }
    Ok(out)
}

pub fn parse_labels(path: impl AsRef<Path>) -> Result<Vec<(String, Label)>> {
    let path = path.as_ref();
    read_labels(open(path)?, &path.display().to_string())
}

/// Reads `exam_id,label`.
pub fn read_labels<R: Read>(reader: R, source: &str) -> Result<Vec<(String, Label)>> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(|e| row_error(source, e))?.clone();
    check_header(source, &header, &LABEL_HEADER, true)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| row_error(source, e))?;
        let line = row.position().map_or(0, |p| p.line());
        if !seen.insert(row[0].to_string()) {
            return Err(parse_error(source, line, "exam_id", format!("duplicate exam id `{}`", &row[0])));
        }
        let label: Label = row[1].parse().map_err(|msg: String| parse_error(source, line, "label", msg))?;
        out.push((row[0].to_string(), label));
    }
    Ok(out)
}

pub fn write_labels<W: Write>(writer: W, labels: &[(String, Label)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(LABEL_HEADER)?;
    for (id, label) in labels {
        wtr.write_record([id.as_str(), label.as_str()])?;
    }
    wtr.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

/// Joins aggregated scores with optional metadata and labels. Exams
/// without a label are `unknown`; metadata and labels for exams that have
/// no score are ignored.
pub fn join_exam_records(
    scores: &[super::aggregate::ExamScore],
    metadata: &[ExamMetadata],
    labels: &[(String, Label)],
) -> Vec<ExamRecord> {
    let meta: std::collections::HashMap<&str, &ExamMetadata> =
        metadata.iter().map(|m| (m.exam_id.as_str(), m)).collect();
    let labels: std::collections::HashMap<&str, Label> = labels.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    scores
        .iter()
        .map(|s| {
            let m = meta.get(s.exam_id.as_str());
            ExamRecord {
                exam_id: s.exam_id.clone(),
                patient_id: m.map(|m| m.patient_id.clone()).unwrap_or_default(),
                score: s.score,
                label: labels.get(s.exam_id.as_str()).copied().unwrap_or(Label::Unknown),
                attributes: m.map(|m| m.attributes.clone()).unwrap_or_default(),
            }
        })
        .collect()
}

/// Reads a history JSONL file from `path`.
pub fn parse_history(path: impl AsRef<Path>) -> Result<Vec<HistoryEntry>> {
    let path = path.as_ref();
    read_history(open(path)?, &path.display().to_string())
}

/// Reads history JSON lines; blank lines are skipped.
pub fn read_history<R: Read>(reader: R, source: &str) -> Result<Vec<HistoryEntry>> {
    let mut entries = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: HistoryEntry = serde_json::from_str(&line).map_err(|e| {
            parse_error(source, line_no, &format!("column {}", e.column()), e.to_string())
        })?;
        if entry.exam_birads > 6 {
            return Err(parse_error(source, line_no, "exam_birads", "BI-RADS must be 0-6"));
        }
        if entry.followups.iter().any(|f| f.birads > 6) {
            return Err(parse_error(source, line_no, "followups", "BI-RADS must be 0-6"));
        }
        entries.push(entry);
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_valid_image_rows() {
        let text = "image_id,exam_id,laterality,view,score\ni1,e1,L,CC,0.25\ni2,e1,R,MLO,1\n";
        let rows = read_image_scores(text.as_bytes(), "mem").unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].laterality, Laterality::Left);
        assert_eq!(rows[1].score, 1.0);
    }

    #[test]
    fn out_of_range_score_cites_line() {
        let text = "image_id,exam_id,laterality,view,score\ni1,e1,L,CC,0.5\ni2,e1,R,CC,1.2\n";
        let err = read_image_scores(text.as_bytes(), "mem").unwrap_err();
        match &err {
            Error::ScoreOutOfRange { line, value, .. } => {
                assert_eq!(*line, 3);
                assert_eq!(value, "1.2");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains(":3:"));
    }

    #[test]
    fn header_only_is_empty() {
        let rows = read_image_scores("image_id,exam_id,laterality,view,score\n".as_bytes(), "mem").unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn malformed_rows_name_line_and_column() {
        let text = "image_id,exam_id,laterality,view,score\ni1,e1,,CC,0.5\n";
        let err = read_image_scores(text.as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, ref column, .. } if column == "laterality"));

        let text = "image_id,exam_id,laterality,view,score\ni1,e1,L,CC,abc\n";
        let err = read_image_scores(text.as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, ref column, .. } if column == "score"));

        let text = "image_id,exam_id,laterality,view,score\ni1,e1,L,CC,0.1\ni1,e2,L,CC,0.1\n";
        assert!(read_image_scores(text.as_bytes(), "mem").is_err());

        let text = "image_id,exam,laterality,view,score\n";
        assert!(matches!(read_image_scores(text.as_bytes(), "mem"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn exam_rows_round_trip() {
        let text = "exam_id,patient_id,score,label,dataset,scanner\n\
                    e1,p1,0.9,cancer,OPTIMAM,HS\n\
                    e2,p2,0.1,non_cancer,WUSTL,\n";
        let exams = read_exam_records(text.as_bytes(), "mem").unwrap();
        assert_eq!(exams[0].label, Label::Cancer);
        assert_eq!(exams[0].attribute("scanner"), Some("HS"));
        assert_eq!(exams[1].attribute("scanner"), None);

        let mut out = Vec::new();
        write_exam_records(&mut out, &exams).unwrap();
        let back = read_exam_records(out.as_slice(), "mem").unwrap();
        assert_eq!(back, exams);
    }

    #[test]
    fn bad_label_is_rejected() {
        let text = "exam_id,patient_id,score,label\ne1,p1,0.9,maybe\n";
        let err = read_exam_records(text.as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, ref column, .. } if column == "label"));
    }

    #[test]
    fn history_lines() {
        let text = r#"{"exam_id":"e1","exam_date":"2015-01-10","exam_birads":1,"biopsies":[{"date":"2015-06-01","outcome":"malignant"}]}

{"exam_id":"e2","exam_date":"2015-01-10","exam_birads":2,"followups":[{"date":"2017-02-01","birads":1}]}
"#;
        let entries = read_history(text.as_bytes(), "mem").unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].label(), Label::Cancer);
        assert_eq!(entries[1].label(), Label::NonCancer);

        let bad = r#"{"exam_id":"e1","exam_date":"2015-02-30","exam_birads":1}"#;
        assert!(matches!(read_history(bad.as_bytes(), "mem"), Err(Error::Parse { line: 1, .. })));
        let bad = r#"{"exam_id":"e1","exam_date":"2015-02-03","exam_birads":7}"#;
        assert!(read_history(bad.as_bytes(), "mem").is_err());
    }

    #[test]
    fn labels_and_metadata_join() {
        let labels = read_labels("exam_id,label\ne1,cancer\n".as_bytes(), "mem").unwrap();
        let meta = read_exam_metadata("exam_id,patient_id,site\ne2,p9,A\n".as_bytes(), "mem").unwrap();
        let scores = vec![
            super::super::aggregate::ExamScore { exam_id: "e1".into(), score: 0.4, image_count: 2 },
            super::super::aggregate::ExamScore { exam_id: "e2".into(), score: 0.6, image_count: 1 },
        ];
        let exams = join_exam_records(&scores, &meta, &labels);
        assert_eq!(exams[0].label, Label::Cancer);
        assert!(exams[0].attributes.is_empty());
        assert_eq!(exams[1].label, Label::Unknown);
        assert_eq!((exams[1].patient_id.as_str(), exams[1].attribute("site")), ("p9", Some("A")));

        let mut buf = Vec::new();
        write_labels(&mut buf, &labels).unwrap();
        assert_eq!(read_labels(buf.as_slice(), "mem").unwrap(), labels);
        assert!(read_labels("exam_id,label\ne1,cancer\ne1,unknown\n".as_bytes(), "mem").is_err());
    }
}
