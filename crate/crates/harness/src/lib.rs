//! Command-line driver for the discrimination, generation, gradient-variance,
//! operator-size and Ising experiments.
//!
//! A run resolves a JSON config plus command-line overrides into an
//! [`config::ExperimentConfig`], validates it without computing, executes
//! independent work units on a worker pool and writes one CSV of
//! [`output::ResultRow`]s.

pub mod cache;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod run;

pub use error::{HarnessError, Result};

/// JSON schema of the config file.
pub const CONFIG_SCHEMA: &str = include_str!("../../../docs/config.schema.json");
