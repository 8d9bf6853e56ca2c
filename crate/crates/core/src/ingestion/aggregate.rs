use std::collections::HashMap;

use super::records::{ImageScoreRecord, Laterality};
use crate::error::{Error, Result};

/// Exam score: the mean image score of each breast, then the maximum over
/// the breasts present.
pub fn aggregate_exam_score(images: &[ImageScoreRecord]) -> Result<f64> {
    if images.is_empty() {
        return Err(Error::NoImages(String::new()));
    }
    let mut sums = [(0.0_f64, 0_usize); 2];
    for image in images {
        let slot = match image.laterality {
            Laterality::Left => 0,
            Laterality::Right => 1,
        };
        sums[slot].0 += image.score;
        sums[slot].1 += 1;
    }
    Ok(sums
        .iter()
        .filter(|(_, n)| *n > 0)
        .map(|(s, n)| s / *n as f64)
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExamScore {
    pub exam_id: String,
    pub score: f64,
    pub image_count: usize,
}

/// Groups image rows by exam (in order of first appearance) and aggregates
/// each group.
pub fn aggregate_exams(images: &[ImageScoreRecord]) -> Result<Vec<ExamScore>> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<ImageScoreRecord>> = HashMap::new();
    for image in images {
        let group = groups.entry(image.exam_id.as_str()).or_insert_with(|| {
            order.push(image.exam_id.as_str());
            Vec::new()
        });
        group.push(image.clone());
    }
    order
        .into_iter()
        .map(|exam_id| {
            let group = &groups[exam_id];
            let score = aggregate_exam_score(group)
                .map_err(|_| Error::NoImages(exam_id.to_string()))?;
            Ok(ExamScore {
                exam_id: exam_id.to_string(),
                score,
                image_count: group.len(),
            })
        })
        .collect()
}
