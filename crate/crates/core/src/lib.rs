//! Mixed lifetime distributions built from generalized intensities,
//! generalized renewal processes with min-coupled intervals, and numerical
//! plus Monte Carlo verification of Lorden-type bounds on the backward and
//! forward renewal times.
//!
//! Modules:
//! - [`hazard`]: intensities with atoms, conversions to and from distribution
//!   functions, moments, exact sampling, assumption checks.
//! - [`renewal`]: grid discretization, Stieltjes convolution, renewal
//!   functions, stochastic-order checks, bounds.
//! - [`simulator`]: reproducible replications and bound verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hazard;
pub mod par;
mod poly;
mod quadrature;
pub mod renewal;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
pub use par::Execution;
