use crate::error::{Error, Result};

/// Two-sample Kolmogorov-Smirnov statistic: the largest absolute gap
/// between the empirical CDFs, evaluated at every sample point.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Undefined("KS statistic: a sample is empty".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("KS samples must be finite".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as u128, b.len() as u128);

    let (mut i, mut j) = (0usize, 0usize);
    let mut best: u128 = 0;
    while i < a.len() || j < b.len() {
        let t = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        // |i/na - j/nb| scaled by na*nb
        let (x, y) = (i as u128 * nb, j as u128 * na);
        best = best.max(x.abs_diff(y));
    }
    Ok(best as f64 / (na * nb) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(a: &[f64], b: &[f64]) -> f64 {
        let ecdf = |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64;
        a.iter()
            .chain(b)
            .map(|&t| (ecdf(a, t) - ecdf(b, t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn examples() {
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(ks_statistic(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(brute_force(&[1.0, 2.0, 3.0, 4.0], &[3.0, 4.0, 5.0, 6.0]), 0.5);
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0, 4.0], &[3.0, 4.0, 5.0, 6.0]).unwrap(), 0.5);
    }

    #[test]
    fn empty_is_undefined() {
        assert!(ks_statistic(&[], &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn matches_brute_force_and_is_symmetric(
            a in prop::collection::vec((0u8..15).prop_map(f64::from), 1..50),
            b in prop::collection::vec((0u8..15).prop_map(f64::from), 1..50),
        ) {
            let d = ks_statistic(&a, &b).unwrap();
            prop_assert!((d - brute_force(&a, &b)).abs() <= 1e-12);
            prop_assert_eq!(d, ks_statistic(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}
