//! Estimation of a finite-population mode under simple random sampling
//! without replacement, using a correlated auxiliary variable.
//!
//! The mode of each variable is approximated through the empirical relation
//! `mode ≈ 3·median − 2·mean`. On top of that naive estimator the crate
//! provides ratio, product, and shifted (transformed) ratio/product
//! estimators, the first-order bias and mean square error expressions for
//! all of them, the closed-form MSE-minimising shift scalars, and a
//! deterministic Monte Carlo harness that measures simulated MSE, relative
//! efficiency, absolute relative bias, exact-vs-simulated MSE ratios and
//! confidence-interval coverage.
//!
//! Module map:
//! - [`dataset`]: populations, synthetic generation, CSV ingestion, SRSWOR
//!   draws and exhaustive sample enumeration.
//! - [`density`]: marginal density estimates at the population medians
//!   (parametric Gamma fit or Gaussian KDE).
//! - [`estimators`]: the five point estimators computed from one sample.
//! - [`theory`]: population-level moments and every closed-form result
//!   (variances, MSEs, optimal scalars, efficiency conditions, t quantiles,
//!   confidence intervals).
//! - [`simulation`]: Monte Carlo engine, scalar sweep, coverage study and
//!   an exhaustive-enumeration oracle.
//! - [`report`]: CSV rendering of the report types (JSON comes from the
//!   serde derives).

pub mod dataset;
pub mod density;
pub mod estimators;
pub mod report;
pub mod rng;
pub mod simulation;
pub mod special;
pub mod theory;

pub(crate) mod stats;
