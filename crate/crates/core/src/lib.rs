//! Variable-bandwidth kernel density estimation with square-root-law
//! clipping, plug-in pilots, asymptotic bias and variance constants, and a
//! seeded Monte Carlo lab.
//!
//! Negated comparisons such as `!(h > 0.0)` are used on purpose: they also
//! reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod clipping;
pub mod densities;
pub mod error;
pub mod exec;
pub mod kernel;
pub mod numdiff;
pub mod quadrature;
pub mod sample;
pub mod simlab;
pub mod estimators;
pub mod rng;

pub use error::{Error, Result};
