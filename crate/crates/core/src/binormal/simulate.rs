use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::model::{separation_from_auc, SamplingMix};
use crate::error::{Error, Result};
use crate::metrics::auc;
use crate::rng::{stream_rng, StreamRng};

/// Parameters of one two-set draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinormalSpec {
    pub target_auc: f64,
    /// Score shift applied to both classes of Set 1.
    pub bias_m: f64,
    pub prevalence_set0: f64,
    pub prevalence_set1: f64,
    pub n_set0: usize,
    pub n_set1: usize,
    pub seed: u64,
}

impl BinormalSpec {
    pub fn separation_a(&self) -> Result<f64> {
        separation_from_auc(self.target_auc)
    }

    /// `(positives, negatives)` per set: positives are the prevalence times
    /// the set size rounded to the nearest integer. Each class needs at
    /// least one member.
    pub fn class_counts(&self) -> Result<[(usize, usize); 2]> {
        let mut out = [(0, 0); 2];
        for (set, (prev, n)) in [(self.prevalence_set0, self.n_set0), (self.prevalence_set1, self.n_set1)]
            .into_iter()
            .enumerate()
        {
            if !(prev > 0.0 && prev < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "prevalence of set {set} ({prev}) must be in (0, 1)"
                )));
            }
            let pos = (prev * n as f64).round() as usize;
            let neg = n.saturating_sub(pos);
            if pos == 0 || neg == 0 {
                return Err(Error::InvalidParameter(format!(
                    "set {set}: prevalence {prev} of {n} leaves {pos} positives and {neg} negatives"
                )));
            }
            out[set] = (pos, neg);
        }
        Ok(out)
    }
}

/// Pooled scores of both sets, with the set each score came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CombinedSample {
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
    pub pos_set: Vec<u8>,
    pub neg_set: Vec<u8>,
}

impl CombinedSample {
    /// Fractions of negatives and positives that actually came from Set 1.
    pub fn realized_mix(&self) -> SamplingMix {
        let frac = |sets: &[u8]| sets.iter().filter(|&&s| s == 1).count() as f64 / sets.len().max(1) as f64;
        SamplingMix {
            p0: frac(&self.neg_set),
            p1: frac(&self.pos_set),
        }
    }

    pub fn combined_auc(&self) -> Result<f64> {
        auc(&self.pos, &self.neg)
    }

    /// AUC of one set on its own.
    pub fn set_auc(&self, set: u8) -> Result<f64> {
        let pick = |scores: &[f64], sets: &[u8]| -> Vec<f64> {
            scores.iter().zip(sets).filter(|(_, &s)| s == set).map(|(v, _)| *v).collect()
        };
        auc(&pick(&self.pos, &self.pos_set), &pick(&self.neg, &self.neg_set))
    }

    fn push(&mut self, positive: bool, set: u8, score: f64) {
        if positive {
            self.pos.push(score);
            self.pos_set.push(set);
        } else {
            self.neg.push(score);
            self.neg_set.push(set);
        }
    }
}

fn draw(rng: &mut StreamRng, mean: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + z
}

pub(crate) fn sample_combined_with(spec: &BinormalSpec, rng: &mut StreamRng) -> Result<CombinedSample> {
    let a = spec.separation_a()?;
    let counts = spec.class_counts()?;
    let mut out = CombinedSample::default();
    for (set, &(pos, neg)) in counts.iter().enumerate() {
        let shift = if set == 1 { spec.bias_m } else { 0.0 };
        for _ in 0..neg {
            let s = draw(rng, shift);
            out.push(false, set as u8, s);
        }
        for _ in 0..pos {
            let s = draw(rng, a + shift);
            out.push(true, set as u8, s);
        }
    }
    Ok(out)
}

/// Draws both sets of `spec` with fixed per-set class counts.
pub fn sample_combined(spec: &BinormalSpec) -> Result<CombinedSample> {
    sample_combined_with(spec, &mut stream_rng(spec.seed, 0))
}

/// Draws `n_pos` positives and `n_neg` negatives, assigning each to Set 1
/// with probability `mix.p1` (positives) or `mix.p0` (negatives).
pub fn sample_mixture(
    target_auc: f64,
    m: f64,
    mix: SamplingMix,
    n_pos: usize,
    n_neg: usize,
    rng: &mut StreamRng,
) -> Result<CombinedSample> {
    let a = separation_from_auc(target_auc)?;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidParameter("both classes need at least one case".into()));
    }
    let mut out = CombinedSample::default();
    for _ in 0..n_neg {
        let set = rng.random_bool(mix.p0) as u8;
        let s = draw(rng, f64::from(set) * m);
        out.push(false, set, s);
    }
    for _ in 0..n_pos {
        let set = rng.random_bool(mix.p1) as u8;
        let s = draw(rng, a + f64::from(set) * m);
        out.push(true, set, s);
    }
    Ok(out)
}
