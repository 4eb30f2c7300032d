//! Command-line front end for `voxsep`: scene simulation, separation,
//! enhancement, analysis and the end-to-end pipeline.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod report;

pub use app::{execute, run, Cli};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use report::FeatureReport;

/// Report JSON schema shipped with the crate.
pub const REPORT_SCHEMA: &str = include_str!("../schema/feature_report.schema.json");
