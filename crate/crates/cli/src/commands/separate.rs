use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use voxsep::ica::{fastica, SeparationResult, SourceOrder, UnmixingMatrix, WhiteningTransform};
use voxsep::scene::SeparationScore;
use voxsep::MonoSignal;

use super::Context;
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, load_signals, write_json, NamedSignal};
use crate::report::Provenance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedFile {
    pub file: String,
    /// Gain applied to the unit-variance source before writing.
    pub wav_scale: f64,
}

/// Contents of `separation.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub schema_version: String,
    pub channels: usize,
    pub components: usize,
    pub sample_rate: u32,
    pub samples: usize,
    pub contrast: String,
    pub order: SourceOrder,
    pub all_converged: bool,
    pub unmixing: UnmixingMatrix,
    pub whitening: WhiteningTransform,
    pub mixing_estimate: Vec<Vec<f64>>,
    pub outputs: Vec<SeparatedFile>,
    pub score: Option<SeparationScore>,
    pub provenance: Provenance,
}

/// Gain that brings the peak of `s` to `peak`.
pub fn peak_scale(s: &MonoSignal, peak: f64) -> f64 {
    let m = s.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m > 0.0 {
        peak / m
    } else {
        1.0
    }
}

pub fn load_refs(paths: &[PathBuf]) -> CliResult<Option<Vec<MonoSignal>>> {
    if paths.is_empty() {
        return Ok(None);
    }
    let (refs, _) = load_signals(paths)?;
    Ok(Some(refs.into_iter().map(|r| r.signal).collect()))
}

/// Run FastICA on the given channels and write `s<k>.wav` plus `separation.json` to `dir`.
pub fn run_separation(
    channels: &[NamedSignal],
    components: Option<usize>,
    refs: Option<&[MonoSignal]>,
    ctx: &Context,
    dir: &Path,
    provenance: &Provenance,
) -> CliResult<(SeparationResult, SeparationReport)> {
    if channels.is_empty() {
        return Err(CliError::Usage("no input channels".into()));
    }
    if let Some(n) = components {
        if n == 0 || n > channels.len() {
            return Err(CliError::Usage(format!(
                "--components {n} must be between 1 and the number of input channels ({})",
                channels.len()
            )));
        }
    }
    let mut params = ctx.cfg.ica.clone();
    if components.is_some() {
        params.n_components = components;
    }
    let mixtures: Vec<MonoSignal> = channels.iter().map(|c| c.signal.clone()).collect();
    let result = fastica(&mixtures, &params, refs)?;

    ensure_dir(dir)?;
    let mut outputs = Vec::new();
    for (k, s) in result.sources.iter().enumerate() {
        let scale = peak_scale(s, ctx.cfg.output.wav_peak);
        let file = format!("s{}.wav", k + 1);
        voxsep::signal::write_wav(&s.scaled(scale)?, dir.join(&file))?;
        outputs.push(SeparatedFile {
            file,
            wav_scale: scale,
        });
    }
    let report = SeparationReport {
        schema_version: "1.0.0".into(),
        channels: channels.len(),
        components: result.sources.len(),
        sample_rate: mixtures[0].sample_rate(),
        samples: mixtures[0].len(),
        contrast: params.contrast.id().into(),
        order: result.order,
        all_converged: result.all_converged(),
        unmixing: result.unmixing.clone(),
        whitening: result.whitening.clone(),
        mixing_estimate: result.mixing_estimate.clone(),
        outputs,
        score: result.score.clone(),
        provenance: provenance.clone(),
    };
    write_json(&dir.join("separation.json"), &report)?;
    Ok((result, report))
}

pub fn cmd_separate(
    inputs: &[PathBuf],
    components: Option<usize>,
    refs: &[PathBuf],
    ctx: &Context,
) -> CliResult<SeparationReport> {
    let (channels, digests) = load_signals(inputs)?;
    let refs = load_refs(refs)?;
    let provenance = Provenance::new("separate", &ctx.cfg, digests);
    let (_, report) = run_separation(
        &channels,
        components,
        refs.as_deref(),
        ctx,
        &ctx.out,
        &provenance,
    )?;
    Ok(report)
}
