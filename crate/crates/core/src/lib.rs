//! Closed-form allocation-constrained optimal portfolios for a CRRA investor
//! in Heston's stochastic volatility model.

// negated comparisons are used on purpose so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
mod error;
pub mod extensions;
pub mod heston;
pub mod montecarlo;
pub mod numeric;
pub mod policy;
pub mod riccati;
pub mod scenario;
pub mod wel;

pub use error::{Error, Result};
