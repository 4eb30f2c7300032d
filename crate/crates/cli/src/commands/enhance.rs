use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use voxsep::enhance::{enhance, Enhanced};
use voxsep::signal::write_wav;

use super::Context;
use crate::error::CliResult;
use crate::io::{ensure_dir, file_stem, load_mono};

/// Summary of one enhancement run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhanceSummary {
    pub file: String,
    pub pause_frames: usize,
    pub analysis_frames: usize,
    /// True when no frame passed the pause threshold and the quietest frames were used.
    pub fallback: bool,
    pub profile_frames: usize,
}

impl EnhanceSummary {
    pub fn new(file: String, e: &Enhanced) -> Self {
        Self {
            file,
            pause_frames: e.mask.pause_count(),
            analysis_frames: e.mask.len(),
            fallback: e.mask.fallback,
            profile_frames: e.profile.frames_used,
        }
    }
}

/// Enhance a mono WAV; the output defaults to `<out>/<stem>_enhanced.wav`.
pub fn cmd_enhance(
    input: &Path,
    output: Option<&Path>,
    ctx: &Context,
) -> CliResult<EnhanceSummary> {
    let signal = load_mono(input)?;
    let enhanced = enhance(&signal, &ctx.cfg.enhance)?;
    let path: PathBuf = match output {
        Some(p) => p.to_path_buf(),
        None => {
            ensure_dir(&ctx.out)?;
            ctx.out.join(format!("{}_enhanced.wav", file_stem(input)))
        }
    };
    write_wav(&enhanced.signal, &path)?;
    Ok(EnhanceSummary::new(path.display().to_string(), &enhanced))
}
