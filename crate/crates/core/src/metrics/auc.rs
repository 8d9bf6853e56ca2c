use crate::error::{Error, Result};
use crate::ingestion::Scored;

/// Area under the ROC curve: the fraction of (positive, negative) pairs in
/// which the positive scores higher, ties counting one half.
///
/// Runs in O(n log n). The pair count is accumulated as an exact integer
/// (twice the Mann-Whitney U) so the result equals the pairwise definition
/// bit for bit.
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::undefined_auc());
    }
    if pos.iter().chain(neg).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("AUC scores must be finite".into()));
    }
    let mut pos = pos.to_vec();
    let mut neg = neg.to_vec();
    pos.sort_unstable_by(f64::total_cmp);
    neg.sort_unstable_by(f64::total_cmp);

    let (mut below, mut not_above) = (0usize, 0usize);
    let mut twice_u: u128 = 0;
    for &x in &pos {
        while below < neg.len() && neg[below] < x {
            below += 1;
        }
        not_above = not_above.max(below);
        while not_above < neg.len() && neg[not_above] <= x {
            not_above += 1;
        }
        twice_u += (2 * below + (not_above - below)) as u128;
    }
    Ok(ratio(twice_u, pos.len() as u128, neg.len() as u128))
}

fn ratio(twice_u: u128, n_pos: u128, n_neg: u128) -> f64 {
    twice_u as f64 / (2 * n_pos * n_neg) as f64
}

/// Splits labeled items into (positive, negative) score vectors, dropping
/// unknown labels.
pub fn split_scores<S: Scored>(items: &[S]) -> (Vec<f64>, Vec<f64>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for item in items {
        match item.label().is_positive() {
            Some(true) => pos.push(item.score()),
            Some(false) => neg.push(item.score()),
            None => {}
        }
    }
    (pos, neg)
}

/// AUC of labeled items; unknown labels are ignored.
pub fn auc_of<S: Scored>(items: &[S]) -> Result<f64> {
    let (pos, neg) = split_scores(items);
    auc(&pos, &neg)
}

/// Labeled scores sorted once, so that the AUC of any multiset drawn from
/// them (given as per-item multiplicities) costs a single linear pass.
#[derive(Debug, Clone)]
pub struct RankedScores {
    order: Vec<usize>,
    // exclusive end of each tie group within `order`
    group_ends: Vec<usize>,
    positive: Vec<bool>,
}

impl RankedScores {
    /// `labels[i]` is `true` for a positive. Scores must be finite.
    pub fn new(scores: &[f64], labels: &[bool]) -> Result<Self> {
        assert_eq!(scores.len(), labels.len());
        if scores.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("AUC scores must be finite".into()));
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        let mut group_ends = Vec::new();
        for k in 1..order.len() {
            if scores[order[k]] != scores[order[k - 1]] {
                group_ends.push(k);
            }
        }
        if !order.is_empty() {
            group_ends.push(order.len());
        }
        Ok(RankedScores {
            order,
            group_ends,
            positive: labels.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.positive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
    }

    /// AUC of the multiset with `counts[i]` copies of item `i`; `None` if a
    /// class ends up empty.
    pub fn auc_with_counts(&self, counts: &[u32]) -> Option<f64> {
        debug_assert_eq!(counts.len(), self.len());
        let mut neg_below: u128 = 0;
        let mut total_pos: u128 = 0;
        let mut twice_u: u128 = 0;
        let mut start = 0;
        for &end in &self.group_ends {
            let (mut wp, mut wn) = (0u128, 0u128);
            for &i in &self.order[start..end] {
                if self.positive[i] {
                    wp += counts[i] as u128;
                } else {
                    wn += counts[i] as u128;
                }
            }
            twice_u += wp * (2 * neg_below + wn);
            neg_below += wn;
            total_pos += wp;
            start = end;
        }
        if total_pos == 0 || neg_below == 0 {
            None
        } else {
            Some(ratio(twice_u, total_pos, neg_below))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(pos: &[f64], neg: &[f64]) -> f64 {
        let mut total = 0.0;
        for p in pos {
            for n in neg {
                total += if p > n {
                    1.0
                } else if p == n {
                    0.5
                } else {
                    0.0
                };
            }
        }
        total / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn examples() {
        assert_eq!(auc(&[0.9, 0.8], &[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5], &[0.5]).unwrap(), 0.5);
        // pairs: (0.8,0.6) (0.8,0.2) (0.4,0.2) win, (0.4,0.6) loses
        assert_eq!(brute_force(&[0.8, 0.4], &[0.6, 0.2]), 0.75);
        assert_eq!(auc(&[0.8, 0.4], &[0.6, 0.2]).unwrap(), 0.75);
    }

    #[test]
    fn empty_class_is_undefined_not_nan() {
        assert!(matches!(auc(&[], &[0.1]), Err(Error::Undefined(_))));
        assert!(matches!(auc(&[0.1], &[]), Err(Error::Undefined(_))));
    }

    #[test]
    fn counts_match_materialized_multiset() {
        let scores = [0.1, 0.5, 0.5, 0.7, 0.2, 0.5];
        let labels = [false, true, false, true, true, false];
        let ranked = RankedScores::new(&scores, &labels).unwrap();
        let counts = [2, 1, 0, 3, 1, 2];
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for i in 0..scores.len() {
            for _ in 0..counts[i] {
                if labels[i] { pos.push(scores[i]) } else { neg.push(scores[i]) }
            }
        }
        assert_eq!(ranked.auc_with_counts(&counts), Some(auc(&pos, &neg).unwrap()));
        assert_eq!(ranked.auc_with_counts(&[1, 0, 1, 0, 0, 1]), None);
    }

    fn small_sample() -> impl Strategy<Value = Vec<f64>> {
        // coarse grid so ties are common
        prop::collection::vec((0u8..20).prop_map(|k| k as f64 / 19.0), 1..50)
    }

    proptest! {
        #[test]
        fn equals_brute_force(pos in small_sample(), neg in small_sample()) {
            let fast = auc(&pos, &neg).unwrap();
            prop_assert!((fast - brute_force(&pos, &neg)).abs() <= 1e-12);
        }

        #[test]
        fn complement_sums_to_one(pos in small_sample(), neg in small_sample()) {
            let sum = auc(&pos, &neg).unwrap() + auc(&neg, &pos).unwrap();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn invariant_under_increasing_transform(pos in small_sample(), neg in small_sample()) {
            let f = |v: &f64| (3.0 * v - 1.0).exp();
            let tp: Vec<f64> = pos.iter().map(f).collect();
            let tn: Vec<f64> = neg.iter().map(f).collect();
            prop_assert_eq!(auc(&pos, &neg).unwrap(), auc(&tp, &tn).unwrap());
        }
    }
}
