use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// Standard normal CDF, `Φ(x) = erfc(-x/√2) / 2`.
///
/// `libm::erfc` is the fdlibm rational approximation, accurate to about one
/// ulp, which keeps the relative error small in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

// Acklam's rational approximation, relative error below 1.15e-9.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.02425;

fn acklam(p: f64) -> f64 {
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Standard normal quantile `Φ⁻¹(p)` for `p` in (0, 1): Acklam's
/// approximation polished by one Newton step against [`normal_cdf`].
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "normal quantile needs p in (0, 1), got {p}"
        )));
    }
    let x = acklam(p);
    let density = normal_pdf(x);
    if density == 0.0 {
        return Ok(x);
    }
    Ok(x - (normal_cdf(x) - p) / density)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// erf by its Maclaurin series; independent of libm.
    fn erf_series(z: f64) -> f64 {
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        while term.abs() > 1e-18 * sum.abs() {
            n += 1.0;
            term *= -z * z / n;
            sum += term / (2.0 * n + 1.0);
        }
        2.0 / PI.sqrt() * sum
    }

    fn cdf_oracle(x: f64) -> f64 {
        0.5 * (1.0 + erf_series(x / SQRT_2))
    }

    fn quantile_oracle(p: f64) -> f64 {
        let (mut lo, mut hi) = (-8.0, 8.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf_oracle(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn symmetry_points() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn quantile_of_point_seven() {
        let oracle = quantile_oracle(0.7);
        assert!((oracle - 0.524_400_512_708_040_8).abs() < 1e-12);
        assert!((normal_quantile(0.7).unwrap() - 0.524_400_512_708_040_8).abs() < 1e-12);
    }

    #[test]
    fn cdf_agrees_with_series() {
        for i in -50..=50 {
            let x = i as f64 * 0.1;
            // the alternating series cancels badly past |x| = 3
            let tol = if x.abs() <= 3.0 { 1e-13 } else { 1e-9 };
            assert!((normal_cdf(x) - cdf_oracle(x)).abs() < tol, "x = {x}");
        }
    }

    #[test]
    fn round_trip_and_monotone() {
        let mut prev = 0.0;
        for i in 1..10_000 {
            let p = i as f64 / 10_000.0;
            let x = normal_quantile(p).unwrap();
            assert!((normal_cdf(x) - p).abs() <= 1e-12, "p = {p}");
            assert!(x > prev || i == 1);
            prev = x;
        }
        for p in [1e-300, 1e-100, 1e-12, 1e-6, 1.0 - 1e-6, 1.0 - 1e-12] {
            let x = normal_quantile(p).unwrap();
            assert!((normal_cdf(x) - p).abs() <= 1e-12 * p.max(1e-300).max(1.0 - p).min(1.0));
        }
        let xs: Vec<f64> = (-400..=400).map(|i| normal_cdf(i as f64 * 0.02)).collect();
        assert!(xs.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn quantile_rejects_closed_endpoints() {
        for p in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(normal_quantile(p).is_err());
        }
    }
}
