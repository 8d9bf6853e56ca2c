//! Core statistics: AUC with tie handling, two-sample KS distance,
//! quantiles and percentile-bootstrap confidence intervals.

mod auc;
mod bootstrap;
mod ks;
mod quantile;

pub use auc::{auc, auc_of, split_scores, RankedScores};
pub use bootstrap::{bootstrap_auc_ci, bootstrap_ci, BootstrapSettings, ConfidenceInterval};
pub use ks::ks_statistic;
pub use quantile::{quantile_sorted, quartiles, Quartiles};

/// Mean and sample standard deviation (n - 1 denominator; 0 for n = 1).
/// `None` for an empty slice.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    #[test]
    fn mean_std_basics() {
        assert_eq!(super::mean_std(&[]), None);
        assert_eq!(super::mean_std(&[3.0]), Some((3.0, 0.0)));
        let (m, s) = super::mean_std(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
