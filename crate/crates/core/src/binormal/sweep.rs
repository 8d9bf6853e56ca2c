//! Grid sweeps over the binormal model.
//!
//! Each cell is averaged over a fixed number of repetitions. Repetition `r`
//! of cell `c` draws from the stream `stream_id([c, r])` under the sweep
//! seed, so grids are reproducible and independent of thread scheduling.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{combined_auc_delta, separation_from_auc, SamplingMix};
use super::simulate::{sample_combined_with, sample_mixture, BinormalSpec, CombinedSample};
use crate::error::{Error, Result};
use crate::metrics::mean_std;
use crate::rng::{stream_id, stream_rng, StreamRng};

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Inclusive range that set sizes (or class counts) are drawn from
/// uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeRange {
    pub lo: usize,
    pub hi: usize,
}

impl SizeRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        let range = SizeRange { lo, hi };
        range.check()?;
        Ok(range)
    }

    fn check(&self) -> Result<()> {
        if self.lo == 0 || self.lo > self.hi {
            return Err(Error::InvalidParameter(format!(
                "size range {}..={} must be non-empty and start above zero",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut StreamRng) -> usize {
        rng.random_range(self.lo..=self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Axis {
            name: name.to_string(),
            values,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    PrevalenceBias,
    P0p1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    /// One value per grid axis.
    pub coords: Vec<f64>,
    /// Mean of (empirical combined AUC − target AUC).
    pub mean_delta: f64,
    pub std_delta: f64,
    /// Mean closed-form delta evaluated at each repetition's realized mix.
    pub mean_predicted_delta: f64,
}

/// Cells in row-major order over `axes` (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub kind: SweepKind,
    pub axes: Vec<Axis>,
    pub repetitions: usize,
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    pub fn index_of(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(self.shape())
            .fold(0, |acc, (&i, len)| acc * len + i)
    }

    pub fn cell(&self, idx: &[usize]) -> &SweepCell {
        &self.cells[self.index_of(idx)]
    }

    pub fn axis(&self, name: &str) -> Option<usize> {
        self.axes.iter().position(|a| a.name == name)
    }

    /// One row per cell: axis values, `mean_delta`, `std_delta`,
    /// `mean_predicted_delta`, `repetitions`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.axes.iter().map(|a| a.name.as_str()).collect();
        header.extend(["mean_delta", "std_delta", "mean_predicted_delta", "repetitions"]);
        wtr.write_record(&header)?;
        for cell in &self.cells {
            let mut row: Vec<String> = cell.coords.iter().map(f64::to_string).collect();
            row.push(cell.mean_delta.to_string());
            row.push(cell.std_delta.to_string());
            row.push(cell.mean_predicted_delta.to_string());
            row.push(self.repetitions.to_string());
            wtr.write_record(&row)?;
        }
        wtr.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }
}

fn cartesian(shape: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &len in shape {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..len).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}

fn check_common(axes: &[Axis], repetitions: usize, sizes: &SizeRange) -> Result<()> {
    if repetitions == 0 {
        return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
    }
    if let Some(empty) = axes.iter().find(|a| a.values.is_empty()) {
        return Err(Error::InvalidParameter(format!("axis `{}` is empty", empty.name)));
    }
    sizes.check()
}

/// Runs `one(coords, rng)` for every cell and repetition and averages.
fn run_grid<F>(kind: SweepKind, axes: Vec<Axis>, repetitions: usize, seed: u64, one: F) -> Result<SweepGrid>
where
    F: Fn(&[f64], &mut StreamRng) -> Result<(f64, f64)> + Sync,
{
    let shape: Vec<usize> = axes.iter().map(|a| a.values.len()).collect();
    let coords: Vec<Vec<f64>> = cartesian(&shape)
        .into_iter()
        .map(|idx| idx.iter().zip(&axes).map(|(&i, a)| a.values[i]).collect())
        .collect();

    let runs: Vec<Result<(f64, f64)>> = (0..coords.len() * repetitions)
        .into_par_iter()
        .map(|job| {
            let (cell, rep) = (job / repetitions, job % repetitions);
            let mut rng = stream_rng(seed, stream_id(&[cell as u64, rep as u64]));
            one(&coords[cell], &mut rng)
        })
        .collect();

    let mut cells = Vec::with_capacity(coords.len());
    for (cell, chunk) in coords.into_iter().zip(runs.chunks(repetitions)) {
        let mut deltas = Vec::with_capacity(repetitions);
        let mut predicted = Vec::with_capacity(repetitions);
        for run in chunk {
            let (d, p) = run.as_ref().map_err(|e| Error::InvalidParameter(e.to_string()))?;
            deltas.push(*d);
            predicted.push(*p);
        }
        let (mean_delta, std_delta) = mean_std(&deltas).expect("repetitions >= 1");
        cells.push(SweepCell {
            coords: cell,
            mean_delta,
            std_delta,
            mean_predicted_delta: predicted.iter().sum::<f64>() / repetitions as f64,
        });
    }
    Ok(SweepGrid {
        kind,
        axes,
        repetitions,
        cells,
    })
}

fn delta_pair(sample: &CombinedSample, target_auc: f64, m: f64) -> Result<(f64, f64)> {
    let empirical = sample.combined_auc()? - target_auc;
    let predicted = combined_auc_delta(target_auc, m, sample.realized_mix())?;
    Ok((empirical, predicted))
}

/// Set 1 prevalence against Set 1 model bias, with an unbiased Set 0 of
/// fixed prevalence. Both set sizes are redrawn every repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceBiasSweep {
    pub target_aucs: Vec<f64>,
    pub prevalence_axis: Vec<f64>,
    pub bias_axis: Vec<f64>,
    pub repetitions: usize,
    pub sizes: SizeRange,
    /// Prevalence of the unbiased Set 0.
    pub base_prevalence: f64,
    pub seed: u64,
}

impl PrevalenceBiasSweep {
    /// Full-scale grid: 90 prevalences over [0.10, 0.99], 101 biases over
    /// [0, 4], 100 repetitions, set sizes 10,000-40,000.
    pub fn full(target_aucs: Vec<f64>, seed: u64) -> Self {
        PrevalenceBiasSweep {
            target_aucs,
            prevalence_axis: linspace(0.10, 0.99, 90),
            bias_axis: linspace(0.0, 4.0, 101),
            repetitions: 100,
            sizes: SizeRange { lo: 10_000, hi: 40_000 },
            base_prevalence: 0.2,
            seed,
        }
    }

    /// Same ranges on a coarse grid that runs in seconds.
    pub fn desk(target_aucs: Vec<f64>, seed: u64) -> Self {
        PrevalenceBiasSweep {
            target_aucs,
            prevalence_axis: linspace(0.10, 0.99, 19),
            bias_axis: linspace(0.0, 4.0, 21),
            repetitions: 20,
            sizes: SizeRange { lo: 1_000, hi: 4_000 },
            base_prevalence: 0.2,
            seed,
        }
    }
}

/// Grid axes are `target_auc`, `bias`, `prevalence`.
pub fn run_prevalence_bias_sweep(config: &PrevalenceBiasSweep) -> Result<SweepGrid> {
    let axes = vec![
        Axis::new("target_auc", config.target_aucs.clone()),
        Axis::new("bias", config.bias_axis.clone()),
        Axis::new("prevalence", config.prevalence_axis.clone()),
    ];
    check_common(&axes, config.repetitions, &config.sizes)?;
    for &t in &config.target_aucs {
        separation_from_auc(t)?;
    }
    run_grid(SweepKind::PrevalenceBias, axes, config.repetitions, config.seed, |c, rng| {
        let (target_auc, m, prevalence) = (c[0], c[1], c[2]);
        let spec = BinormalSpec {
            target_auc,
            bias_m: m,
            prevalence_set0: config.base_prevalence,
            prevalence_set1: prevalence,
            n_set0: config.sizes.draw(rng),
            n_set1: config.sizes.draw(rng),
            seed: config.seed,
        };
        let sample = sample_combined_with(&spec, rng)?;
        delta_pair(&sample, target_auc, m)
    })
}

/// Direct control of the mix: every case picks its set by a Bernoulli draw
/// with probability `p0` (negatives) or `p1` (positives).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P0P1Sweep {
    pub target_auc: f64,
    pub m_values: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// Range for the positive and the negative counts, drawn separately.
    pub sizes: SizeRange,
    pub repetitions: usize,
    pub seed: u64,
}

impl P0P1Sweep {
    /// 101 values of p0 and p1 over [0, 1], 100 repetitions, 100-10,000
    /// cases per class.
    pub fn full(target_auc: f64, m_values: Vec<f64>, seed: u64) -> Self {
        P0P1Sweep {
            target_auc,
            m_values,
            p_axis: linspace(0.0, 1.0, 101),
            sizes: SizeRange { lo: 100, hi: 10_000 },
            repetitions: 100,
            seed,
        }
    }

    pub fn desk(target_auc: f64, m_values: Vec<f64>, seed: u64) -> Self {
        P0P1Sweep {
            target_auc,
            m_values,
            p_axis: linspace(0.0, 1.0, 11),
            sizes: SizeRange { lo: 1_000, hi: 4_000 },
            repetitions: 20,
            seed,
        }
    }
}

/// Grid axes are `m`, `p0`, `p1`.
pub fn run_p0p1_sweep(config: &P0P1Sweep) -> Result<SweepGrid> {
    let axes = vec![
        Axis::new("m", config.m_values.clone()),
        Axis::new("p0", config.p_axis.clone()),
        Axis::new("p1", config.p_axis.clone()),
    ];
    check_common(&axes, config.repetitions, &config.sizes)?;
    separation_from_auc(config.target_auc)?;
    for &p in &config.p_axis {
        SamplingMix::new(p, p)?;
    }
    run_grid(SweepKind::P0p1, axes, config.repetitions, config.seed, |c, rng| {
        let (m, p0, p1) = (c[0], c[1], c[2]);
        let n_pos = config.sizes.draw(rng);
        let n_neg = config.sizes.draw(rng);
        let sample = sample_mixture(config.target_auc, m, SamplingMix { p0, p1 }, n_pos, n_neg, rng)?;
        delta_pair(&sample, config.target_auc, m)
    })
}

/// A sign change of the mean delta along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCrossing {
    /// Values of the other axes, in grid order.
    pub fixed: Vec<(String, f64)>,
    pub axis: String,
    /// Linearly interpolated position of the zero.
    pub value: f64,
}

/// Zero crossings along the grid's last axis (prevalence or `p1`).
pub fn find_zero_crossings(grid: &SweepGrid) -> Vec<ZeroCrossing> {
    let last = grid.axes.last().map(|a| a.name.clone()).unwrap_or_default();
    find_zero_crossings_along(grid, &last).unwrap_or_default()
}

/// For every combination of the other axes, scans `axis` and reports each
/// point where the mean delta changes sign. Exact zeros are reported at
/// the cell itself; rows without a sign change contribute nothing.
pub fn find_zero_crossings_along(grid: &SweepGrid, axis: &str) -> Result<Vec<ZeroCrossing>> {
    let scan = grid
        .axis(axis)
        .ok_or_else(|| Error::InvalidParameter(format!("grid has no axis `{axis}`")))?;
    let shape = grid.shape();
    let mut other_shape = shape.clone();
    other_shape[scan] = 1;

    let mut out = Vec::new();
    for base in cartesian(&other_shape) {
        let xs = &grid.axes[scan].values;
        let ys: Vec<f64> = (0..shape[scan])
            .map(|k| {
                let mut idx = base.clone();
                idx[scan] = k;
                grid.cell(&idx).mean_delta
            })
            .collect();
        let fixed: Vec<(String, f64)> = grid
            .axes
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != scan)
            .map(|(i, a)| (a.name.clone(), a.values[base[i]]))
            .collect();
        let mut push = |value: f64| {
            out.push(ZeroCrossing {
                fixed: fixed.clone(),
                axis: axis.to_string(),
                value,
            })
        };
        for k in 0..ys.len() {
            if ys[k] == 0.0 {
                push(xs[k]);
            } else if k + 1 < ys.len() && ys[k + 1] != 0.0 && (ys[k] < 0.0) != (ys[k + 1] < 0.0) {
                push(xs[k] + (xs[k + 1] - xs[k]) * ys[k] / (ys[k] - ys[k + 1]));
            }
        }
    }
    Ok(out)
}

/// Writes crossings with one column per fixed axis followed by the
/// crossing position.
pub fn write_crossings_csv<W: Write>(crossings: &[ZeroCrossing], grid: &SweepGrid, axis: &str, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = grid.axes.iter().filter(|a| a.name != axis).map(|a| a.name.clone()).collect();
    header.push(format!("{axis}_crossing"));
    wtr.write_record(&header)?;
    for c in crossings {
        let mut row: Vec<String> = c.fixed.iter().map(|(_, v)| v.to_string()).collect();
        row.push(c.value.to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_grid(deltas: &[f64], xs: &[f64]) -> SweepGrid {
        SweepGrid {
            kind: SweepKind::PrevalenceBias,
            axes: vec![Axis::new("bias", vec![0.5]), Axis::new("prevalence", xs.to_vec())],
            repetitions: 1,
            cells: deltas
                .iter()
                .zip(xs)
                .map(|(&d, &x)| SweepCell {
                    coords: vec![0.5, x],
                    mean_delta: d,
                    std_delta: 0.0,
                    mean_predicted_delta: d,
                })
                .collect(),
        }
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.10, 0.99, 90);
        assert_eq!(v.len(), 90);
        assert_eq!((v[0], v[89]), (0.10, 0.99));
        assert!((v[1] - 0.11).abs() < 1e-12);
        assert_eq!(linspace(0.0, 4.0, 101)[25], 1.0);
    }

    #[test]
    fn crossing_is_interpolated() {
        let grid = hand_grid(&[-0.02, -0.01, 0.01, 0.03], &[0.2, 0.3, 0.4, 0.5]);
        let found = find_zero_crossings(&grid);
        assert_eq!(found.len(), 1);
        assert!((found[0].value - 0.35).abs() < 1e-12);
        assert_eq!(found[0].fixed, vec![("bias".to_string(), 0.5)]);
    }

    #[test]
    fn positive_row_has_no_crossing() {
        let grid = hand_grid(&[0.02, 0.01, 0.01], &[0.2, 0.3, 0.4]);
        assert!(find_zero_crossings(&grid).is_empty());
        let grid = hand_grid(&[0.02, 0.0, 0.01], &[0.2, 0.3, 0.4]);
        assert_eq!(find_zero_crossings(&grid).len(), 1);
        assert!(find_zero_crossings_along(&grid, "nope").is_err());
    }

    #[test]
    fn zero_bias_axis_is_flat() {
        let mut cfg = PrevalenceBiasSweep::desk(vec![0.7], 1);
        cfg.bias_axis = vec![0.0];
        cfg.prevalence_axis = linspace(0.1, 0.9, 5);
        let grid = run_prevalence_bias_sweep(&cfg).unwrap();
        assert_eq!(grid.cells.len(), 5);
        for cell in &grid.cells {
            assert_eq!(cell.mean_predicted_delta, 0.0);
            // 20 reps of ~2,500-case draws: standard error of the mean ~0.002
            assert!(cell.mean_delta.abs() < 0.01, "{cell:?}");
        }
    }

    #[test]
    fn sweep_is_reproducible_and_thread_independent() {
        let mut cfg = P0P1Sweep::desk(0.7, vec![0.5], 9);
        cfg.p_axis = vec![0.0, 1.0];
        cfg.repetitions = 3;
        cfg.sizes = SizeRange { lo: 50, hi: 80 };
        let a = run_p0p1_sweep(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
        let b = pool.install(|| run_p0p1_sweep(&cfg).unwrap());
        assert_eq!(a, b);
        // p0 = 0, p1 = 1 is the most favorable cell of the plane
        let best = a.cell(&[0, 0, 1]).mean_predicted_delta;
        assert!(a.cells.iter().all(|c| c.mean_predicted_delta <= best));
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = P0P1Sweep::desk(1.0, vec![0.0], 0);
        assert!(run_p0p1_sweep(&cfg).is_err());
        cfg.target_auc = 0.7;
        cfg.repetitions = 0;
        assert!(run_p0p1_sweep(&cfg).is_err());
        cfg.repetitions = 1;
        cfg.m_values.clear();
        assert!(run_p0p1_sweep(&cfg).is_err());
        assert!(SizeRange::new(0, 3).is_err());
        assert!(SizeRange::new(5, 3).is_err());
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let grid = hand_grid(&[-0.01, 0.01], &[0.3, 0.4]);
        let mut out = Vec::new();
        grid.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "bias,prevalence,mean_delta,std_delta,mean_predicted_delta,repetitions");
        assert_eq!(text.lines().count(), 3);

        let mut out = Vec::new();
        write_crossings_csv(&find_zero_crossings(&grid), &grid, "prevalence", &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "bias,prevalence_crossing");
        let fields: Vec<f64> = lines[1].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields[0], 0.5);
        assert!((fields[1] - 0.35).abs() < 1e-12);
    }
}
