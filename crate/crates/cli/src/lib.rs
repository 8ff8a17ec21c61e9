//! Batch front end for analysing, designing, simulating, and certifying
//! vibrational control of cluster synchronization.
//!
//! Every command computes all of its outputs in memory before anything is
//! written, and each file is written atomically.

pub mod commands;
mod error;
pub mod output;
pub mod plot;
pub mod reproduce;
pub mod scenario;

pub use commands::{analyze, certify, design, simulate, Overrides};
pub use error::CliError;
pub use output::{write_artifacts, Artifact};
pub use reproduce::{reproduce, SummaryRow};
pub use scenario::{benchmark_scenario, parse_scenario, Scenario};
