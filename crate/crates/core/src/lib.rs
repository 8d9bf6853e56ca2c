//! Score-level shortcut auditing for binary classifiers.
//!
//! When evaluation data pools sources that differ in both cancer prevalence
//! and score offset, pooled AUC can rise above the AUC of every source on
//! its own. This crate measures that on real predictions ([`audit`]),
//! models it with two shifted binormal sets ([`binormal`]), offers
//! weighting, filtering and prevalence matching ([`mitigation`]), and
//! probes features for an attribute ([`probe`]).
//!
//! All randomness comes from [`rng::stream_rng`], so results depend only on
//! the seed and never on thread count.

pub mod audit;
pub mod binormal;
pub mod error;
pub mod ingestion;
pub mod metrics;
pub mod mitigation;
pub mod probe;
pub mod report;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};
