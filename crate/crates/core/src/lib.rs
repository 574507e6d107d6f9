//! Sieve quasi-likelihood ratio (SQLR) significance testing for nonparametric
//! regression with one-hidden-layer sigmoid networks.
//!
//! The library fits ℓ1-constrained sigmoid networks by projected subgradient
//! descent under a null hypothesis (tested input coordinates carry zero
//! weights) and under the alternative (all coordinates free, warm-started from
//! the null fit). The scaled gap between the two minimized squared-error
//! losses is asymptotically χ²₁ under the null, which yields a calibrated
//! p-value for "feature set S is not associated with the response".
//!
//! Module map:
//!
//! - [`nn_sieve`] — the constrained network sieve: evaluation, exact
//!   gradients, exact partial derivatives of any order, ℓ1-ball projection,
//!   and projected-subgradient training.
//! - [`distributions`] — self-contained χ²₁ and F survival functions.
//! - [`sqlr`] — the hypothesis-testing engine (null/alternative fits, the
//!   likelihood-ratio statistic, variance estimate, p-value).
//! - [`ftest`] — linear-regression partial F-test baseline.
//! - [`simulation`] — seeded Monte Carlo study of empirical type-I error and
//!   power.
//! - [`pipeline`] — CSV ingestion, feature scaling, covariate
//!   residualization, and per-feature association scans.
//! - [`report`] — deterministic JSON/text emission (17 significant digits).
//! - [`rng`] — the documented, platform-fixed random number generator every
//!   seeded component uses.

pub mod data;
pub mod distributions;
pub mod error;
pub mod ftest;
pub mod nn_sieve;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod simulation;
pub mod sqlr;

pub use data::Dataset;
pub use error::{Error, Result};
