//! Command-line front end for multifidelity likelihood-free importance sampling.

pub mod commands;
pub mod config;
pub mod experiment;
pub mod output;

pub use config::RunConfig;
pub use experiment::{execute, RunOutput};
