//! Statistically dual distributions.
//!
//! A distribution pair is *dual* when one formula `t(x, y)` reads both as the
//! law of `x` given parameter `y` and as the law of `y` given parameter `x`.
//! The Poisson pmf and the unit-scale Gamma density are such a pair, the
//! fixed-variance Normal is dual to itself, and the negative binomial and Beta
//! laws are linked through an exact cdf identity.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`]: log-gamma, regularized incomplete gamma and beta functions,
//!   the standard normal cdf and the quantile solvers built on them.
//! * [`distributions`]: parameter holders and evaluators for the five laws, in
//!   both their "variable" and "parameter" readings.
//! * [`identities`]: residual evaluators for every duality identity.
//! * [`intervals`]: confidence intervals for the Poisson rate and the Normal
//!   mean built from the dual distributions.
//! * [`reconstruct`]: Monte Carlo reconstruction of the conditional parameter
//!   distribution, checked with a Kolmogorov–Smirnov test.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod identities;
pub mod intervals;
pub mod ks;
pub mod reconstruct;
pub mod special;
pub mod stream;

pub use error::{Error, Result};
