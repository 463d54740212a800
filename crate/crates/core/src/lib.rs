//! Confidence sets of regression models for problems with far more candidate
//! explanatory variables than observations.
//!
//! The pipeline has three phases:
//!
//! 1. [`reduction`]: variable indices are arranged in a hypercube and the
//!    response is regressed on every axis-parallel line of variables; those
//!    that do well in enough of their analyses survive. Repeated in
//!    successively lower-dimensional hypercubes.
//! 2. [`exploratory`]: the survivors are scanned for squared and interaction
//!    terms, which a human (or a script) keeps or discards.
//! 3. [`select`]: every low-dimensional subset of the resulting comprehensive
//!    model is tested against it by likelihood ratio; the models not rejected
//!    form the confidence set.
//!
//! [`dgp`] generates synthetic data, [`lasso`] provides the undertuned lasso
//! comparator, and [`harness`] runs Monte Carlo studies over all of it.

pub mod data;
pub mod dgp;
pub mod exploratory;
pub mod harness;
pub mod io;
pub mod lasso;
pub mod model;
pub mod reduction;
pub mod rng;
pub mod select;
pub mod session;
pub mod stats;

pub use data::{Dataset, Response};
pub use model::{ModelSpec, Term};
pub use stats::{Family, FitError, FitResult, TieMethod};
