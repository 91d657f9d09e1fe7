//! Finite-sample confidence sets by repro samples.
//!
//! A model writes data as Z = G(theta, U) for an auxiliary U with known law. A parameter value
//! is kept when some draw u* reproduces the observed data and a nuclear statistic T(u*, theta)
//! falls in a region holding probability at least alpha under the law of U.

pub mod engine;
pub mod error;
pub mod mixture;
pub mod model;
pub mod models;
pub mod optim;
pub mod par;
pub mod profile;
pub mod region;
pub mod rng;
pub mod stats;

pub use error::{ReproError, Result};
