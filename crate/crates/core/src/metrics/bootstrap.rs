//! Percentile bootstrap.
//!
//! Replicate `r` draws from the random stream `(seed, r)`, so results are
//! identical however rayon splits the work. A replicate on which the
//! statistic is undefined (a class vanished) is discarded and redrawn from
//! the same stream; the discards are counted in the interval.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::auc::{split_scores, RankedScores};
use super::quantile::quantile_sorted;
use crate::error::{Error, Result};
use crate::ingestion::{Label, Scored};
use crate::rng::{stream_rng, StreamRng};

/// Redraws allowed per requested replicate before giving up.
const REDRAW_FACTOR: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
    /// Resample positives and negatives separately, keeping class counts.
    #[serde(default)]
    pub stratified: bool,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        BootstrapSettings {
            replicates: 10_000,
            level: 0.95,
            seed: 0,
            stratified: false,
        }
    }
}

impl BootstrapSettings {
    pub fn new(replicates: usize, seed: u64) -> Self {
        BootstrapSettings {
            replicates,
            seed,
            ..Default::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("bootstrap needs at least one replicate".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "confidence level {} must be in (0, 1)",
                self.level
            )));
        }
        Ok(())
    }
}

/// A point estimate with its percentile interval. `lower <= upper` always
/// holds; the point is not guaranteed to lie inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub replicates: usize,
    pub level: f64,
    pub discarded_degenerate: usize,
}

impl ConfidenceInterval {
    pub fn half_width(&self) -> f64 {
        (self.upper - self.lower) / 2.0
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Index pools the resampler draws from.
struct Strata(Vec<Vec<usize>>);

impl Strata {
    fn new<S: Scored>(items: &[S], stratified: bool) -> Self {
        if !stratified {
            return Strata(vec![(0..items.len()).collect()]);
        }
        let mut pools = vec![Vec::new(), Vec::new(), Vec::new()];
        for (i, item) in items.iter().enumerate() {
            let k = match item.label() {
                Label::Cancer => 0,
                Label::NonCancer => 1,
                Label::Unknown => 2,
            };
            pools[k].push(i);
        }
        pools.retain(|p| !p.is_empty());
        Strata(pools)
    }

    fn draw(&self, rng: &mut StreamRng, mut visit: impl FnMut(usize)) {
        for pool in &self.0 {
            for _ in 0..pool.len() {
                visit(pool[rng.random_range(0..pool.len())]);
            }
        }
    }
}

fn replicate_values<F>(settings: &BootstrapSettings, one: F) -> Result<(Vec<f64>, usize)>
where
    F: Fn(&mut StreamRng) -> Option<f64> + Sync,
{
    let cap = REDRAW_FACTOR * settings.replicates;
    let results: Vec<Option<(f64, usize)>> = (0..settings.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(settings.seed, r as u64);
            let mut discarded = 0;
            loop {
                if let Some(v) = one(&mut rng) {
                    return Some((v, discarded));
                }
                discarded += 1;
                if discarded > cap {
                    return None;
                }
            }
        })
        .collect();

    let mut values = Vec::with_capacity(results.len());
    let mut discarded = 0;
    for res in results {
        let (v, d) = res.ok_or(Error::DegenerateBootstrap { attempts: cap })?;
        values.push(v);
        discarded += d;
    }
    if discarded > cap {
        return Err(Error::DegenerateBootstrap { attempts: discarded });
    }
    Ok((values, discarded))
}

fn interval(point: f64, mut values: Vec<f64>, discarded: usize, settings: &BootstrapSettings) -> ConfidenceInterval {
    values.sort_unstable_by(f64::total_cmp);
    let alpha = 1.0 - settings.level;
    ConfidenceInterval {
        point,
        lower: quantile_sorted(&values, alpha / 2.0),
        upper: quantile_sorted(&values, 1.0 - alpha / 2.0),
        replicates: settings.replicates,
        level: settings.level,
        discarded_degenerate: discarded,
    }
}

/// Percentile bootstrap interval of an arbitrary statistic, resampling
/// items with replacement at the item (exam) level.
///
/// The statistic returns `None` where it is undefined. Being undefined on
/// the full input is an error.
pub fn bootstrap_ci<T, F>(items: &[T], statistic: F, settings: &BootstrapSettings) -> Result<ConfidenceInterval>
where
    T: Scored + Sync,
    F: Fn(&[&T]) -> Option<f64> + Sync,
{
    settings.check()?;
    let all: Vec<&T> = items.iter().collect();
    let point = statistic(&all)
        .ok_or_else(|| Error::Undefined("statistic on the full sample".into()))?;
    let strata = Strata::new(items, settings.stratified);

    let (values, discarded) = replicate_values(settings, |rng| {
        let mut sample = Vec::with_capacity(items.len());
        strata.draw(rng, |i| sample.push(&items[i]));
        statistic(&sample)
    })?;
    Ok(interval(point, values, discarded, settings))
}

/// Bootstrap interval of the AUC.
///
/// Draws exactly the same resamples as [`bootstrap_ci`] with an AUC
/// statistic, but scores each one from pre-sorted data in linear time.
/// Unknown labels are excluded before resampling.
pub fn bootstrap_auc_ci<S: Scored + Sync>(items: &[S], settings: &BootstrapSettings) -> Result<ConfidenceInterval> {
    settings.check()?;
    let labeled: Vec<&S> = items.iter().filter(|i| i.label() != Label::Unknown).collect();
    let (pos, neg) = split_scores(&labeled);
    let point = super::auc(&pos, &neg)?;

    let scores: Vec<f64> = labeled.iter().map(|i| i.score()).collect();
    let labels: Vec<bool> = labeled.iter().map(|i| i.label() == Label::Cancer).collect();
    let ranked = RankedScores::new(&scores, &labels)?;
    let strata = Strata::new(&labeled, settings.stratified);

    let (values, discarded) = replicate_values(settings, |rng| {
        let mut counts = vec![0u32; ranked.len()];
        strata.draw(rng, |i| counts[i] += 1);
        ranked.auc_with_counts(&counts)
    })?;
    Ok(interval(point, values, discarded, settings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::auc_of;

    fn separated() -> Vec<(f64, bool)> {
        vec![(0.9, true), (0.8, true), (0.7, true), (0.3, false), (0.2, false), (0.1, false)]
    }

    #[test]
    fn perfect_separation_gives_degenerate_unit_interval() {
        let ci = bootstrap_auc_ci(&separated(), &BootstrapSettings::new(500, 1)).unwrap();
        assert_eq!((ci.point, ci.lower, ci.upper), (1.0, 1.0, 1.0));
        assert!(ci.discarded_degenerate > 0, "six items lose a class fairly often");
    }

    #[test]
    fn single_replicate_collapses_to_its_value() {
        let data: Vec<(f64, bool)> = (0..40).map(|i| ((i * 7 % 13) as f64, i % 3 == 0)).collect();
        let ci = bootstrap_auc_ci(&data, &BootstrapSettings::new(1, 9)).unwrap();
        assert_eq!(ci.lower, ci.upper);
        assert_eq!(ci.replicates, 1);
    }

    #[test]
    fn fast_path_matches_generic_resampling() {
        let data: Vec<(f64, bool)> = (0..60).map(|i| (((i * 37) % 17) as f64 / 17.0, (i * 11) % 5 < 2)).collect();
        for stratified in [false, true] {
            let settings = BootstrapSettings { replicates: 300, level: 0.9, seed: 5, stratified };
            let fast = bootstrap_auc_ci(&data, &settings).unwrap();
            let slow = bootstrap_ci(&data, |s| auc_of(s).ok(), &settings).unwrap();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let data: Vec<(f64, bool)> = (0..200).map(|i| (((i * 7919) % 101) as f64, i % 4 == 0)).collect();
        let settings = BootstrapSettings::new(400, 3);
        let a = bootstrap_auc_ci(&data, &settings).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| bootstrap_auc_ci(&data, &settings).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn undefined_full_sample_is_an_error() {
        let data = vec![(0.1, true), (0.2, true)];
        assert!(matches!(
            bootstrap_auc_ci(&data, &BootstrapSettings::new(10, 0)),
            Err(Error::Undefined(_))
        ));
        assert!(bootstrap_ci(&data, |s| auc_of(s).ok(), &BootstrapSettings::new(10, 0)).is_err());
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let data = separated();
        let zero = BootstrapSettings { replicates: 0, ..Default::default() };
        assert!(matches!(bootstrap_auc_ci(&data, &zero), Err(Error::InvalidParameter(_))));
        let level = BootstrapSettings { level: 1.0, ..Default::default() };
        assert!(matches!(bootstrap_auc_ci(&data, &level), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn statistic_undefined_on_every_resample_gives_up() {
        let data: Vec<(f64, bool)> = (0..20).map(|i| (i as f64, i % 2 == 0)).collect();
        // defined only on the untouched input order
        let identity = |s: &[&(f64, bool)]| {
            s.iter().enumerate().all(|(i, x)| std::ptr::eq(*x, &data[i])).then_some(1.0)
        };
        let result = bootstrap_ci(&data, identity, &BootstrapSettings::new(2, 0));
        assert!(matches!(result, Err(Error::DegenerateBootstrap { .. })));
    }
}
