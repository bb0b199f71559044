//! Estimators for structured anomalies in Gaussian and count data.
//!
//! The scan statistic MLE ([`scan::mle`]) searches a family of allowed
//! shapes ([`family::FamilySpec`]) for the set maximizing `sum x / sqrt(|S|)`.
//! The mixture estimator ([`mixture::gmm_estimator`]) fits a two-component
//! mixture first and then picks the member of the fitted size with the most
//! responsibility; it avoids the MLE's tendency to overshoot on rich
//! families. [`experiments`] holds the Monte-Carlo drivers that measure both.

pub mod error;
pub mod experiments;
pub mod family;
pub mod graph;
pub mod index_set;
pub mod io;
pub mod lp;
pub mod mixture;
mod objective;
pub mod rng;
pub mod sampling;
pub mod scan;
mod search;
mod subset_state;

pub use error::{Error, Result};
pub use objective::{compensated_sum, CompensatedSum};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/scanning.md")]
    mod scanning {}
    #[doc = include_str!("../../../book/src/mixture.md")]
    mod mixture {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/counts.md")]
    mod counts {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}
