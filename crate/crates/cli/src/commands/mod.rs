pub mod analyze;
pub mod enhance;
pub mod pipeline;
pub mod separate;
pub mod simulate;

use std::path::PathBuf;

use crate::config::RunConfig;

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    /// Seed given on the command line, if any.
    pub seed_override: Option<u64>,
}

impl Context {
    pub fn new(cfg: RunConfig, out: impl Into<PathBuf>) -> Self {
        Self {
            cfg,
            out: out.into(),
            seed_override: None,
        }
    }
}
