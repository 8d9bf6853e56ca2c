//! The two-set binormal model of the AUC paradox: closed forms, Monte
//! Carlo sampling and parameter sweeps.
//!
//! Set 0 is unbiased: negatives score `N(0, 1)` and positives `N(a, 1)`.
//! Set 1 carries a model bias `m` added to both classes: `N(m, 1)` and
//! `N(a + m, 1)`. Each set alone has AUC `Φ(a / √2)`, but pooling them
//! shifts the combined AUC by an amount fixed by `m` and by the chances
//! `p0`, `p1` that a negative, respectively positive, comes from Set 1.

mod model;
mod normal;
mod simulate;
mod sweep;

pub use model::{
    analytic_auc, bias_terms, combined_auc_delta, separation_from_auc, BiasTerms, SamplingMix,
};
pub use normal::{normal_cdf, normal_quantile};
pub use simulate::{sample_combined, sample_mixture, BinormalSpec, CombinedSample};
pub use sweep::{
    find_zero_crossings, find_zero_crossings_along, linspace, run_p0p1_sweep,
    run_prevalence_bias_sweep, write_crossings_csv, Axis, P0P1Sweep, PrevalenceBiasSweep, SizeRange, SweepCell,
    SweepGrid, SweepKind, ZeroCrossing,
};
