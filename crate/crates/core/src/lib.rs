//! Multifidelity likelihood-free importance sampling.

pub mod error;
pub mod gillespie;
pub mod inference;
pub mod models;
pub mod perf;
pub mod rng;
pub mod schedule;
pub mod weightings;

pub use error::{Error, Result};
