//! Simulation of non-regular three-quarter sampling sensors and sparse
//! reconstruction of the fine pixel grid.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod imagecore;
pub mod jsde;
pub mod metrics;
pub mod patterns;
pub mod pipeline;
pub mod sensorsim;

pub use error::{Error, Result};
