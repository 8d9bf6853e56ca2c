use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::normal::{normal_cdf, normal_quantile};
use crate::error::{Error, Result};

fn check_auc(target_auc: f64) -> Result<()> {
    if target_auc > 0.0 && target_auc < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("target AUC {target_auc} must be in (0, 1)")))
    }
}

/// Class separation `a = √2 Φ⁻¹(AUC)` giving the target AUC under
/// unit-variance classes.
pub fn separation_from_auc(target_auc: f64) -> Result<f64> {
    check_auc(target_auc)?;
    Ok(SQRT_2 * normal_quantile(target_auc)?)
}

/// AUC of two independent normals, `Φ((μ1 − μ0) / √(σ1² + σ0²))`.
pub fn analytic_auc(mu0: f64, sigma0: f64, mu1: f64, sigma1: f64) -> Result<f64> {
    if !(sigma0 > 0.0 && sigma1 > 0.0) {
        return Err(Error::InvalidParameter("standard deviations must be positive".into()));
    }
    Ok(normal_cdf((mu1 - mu0) / (sigma1 * sigma1 + sigma0 * sigma0).sqrt()))
}

/// Probabilities that a negative (`p0`) or a positive (`p1`) example comes
/// from the biased set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingMix {
    pub p0: f64,
    pub p1: f64,
}

impl SamplingMix {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        for (name, p) in [("p0", p0), ("p1", p1)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("{name} = {p} must be in [0, 1]")));
            }
        }
        Ok(SamplingMix { p0, p1 })
    }

    /// Weight of cross-set pairs with the positive from Set 1 and the
    /// negative from Set 0.
    pub fn aligned_weight(&self) -> f64 {
        (1.0 - self.p0) * self.p1
    }

    /// Weight of cross-set pairs with the positive from Set 0 and the
    /// negative from Set 1.
    pub fn conflicting_weight(&self) -> f64 {
        self.p0 * (1.0 - self.p1)
    }
}

/// AUC shifts of the two kinds of cross-set pair relative to the target:
/// `aligned = Φ((a+m)/√2) − Φ(a/√2)` (non-negative for `m ≥ 0`) and
/// `conflicting = Φ((a−m)/√2) − Φ(a/√2)` (non-positive for `m ≥ 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasTerms {
    pub aligned: f64,
    pub conflicting: f64,
}

pub fn bias_terms(target_auc: f64, m: f64) -> Result<BiasTerms> {
    let a = separation_from_auc(target_auc)?;
    let base = normal_cdf(a / SQRT_2);
    Ok(BiasTerms {
        aligned: normal_cdf((a + m) / SQRT_2) - base,
        conflicting: normal_cdf((a - m) / SQRT_2) - base,
    })
}

/// Expected combined AUC minus the target AUC when the two sets are pooled
/// under `mix`.
pub fn combined_auc_delta(target_auc: f64, m: f64, mix: SamplingMix) -> Result<f64> {
    let terms = bias_terms(target_auc, m)?;
    Ok(terms.aligned * mix.aligned_weight() + terms.conflicting * mix.conflicting_weight())
}
