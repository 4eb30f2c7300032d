use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use voxsep::enhance::enhance;
use voxsep::signal::write_wav;

use super::analyze::write_contours;
use super::enhance::EnhanceSummary;
use super::separate::{load_refs, run_separation, SeparationReport};
use super::Context;
use crate::error::CliResult;
use crate::io::{ensure_dir, load_signals, write_bytes, write_json};
use crate::report::{analyze_signal, comparison_csv, failed_report, FeatureReport, Provenance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhancedFile {
    #[serde(flatten)]
    pub summary: EnhanceSummary,
    /// Same gain as the separated WAV of this component.
    pub wav_scale: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub separation: SeparationReport,
    pub reports: Vec<FeatureReport>,
}

/// Separate, enhance each component, analyse each enhanced component.
///
/// Layout under the output directory: `separated/`, `enhanced/`, `reports/`,
/// `contours/` and `comparison.csv`.
pub fn cmd_pipeline(
    inputs: &[PathBuf],
    components: Option<usize>,
    refs: &[PathBuf],
    ctx: &Context,
) -> CliResult<PipelineOutput> {
    let (channels, digests) = load_signals(inputs)?;
    let refs = load_refs(refs)?;
    let provenance = Provenance::new("pipeline", &ctx.cfg, digests);
    let (result, separation) = run_separation(
        &channels,
        components,
        refs.as_deref(),
        ctx,
        &ctx.out.join("separated"),
        &provenance,
    )?;
    let enhanced_dir = ctx.out.join("enhanced");
    let reports_dir = ctx.out.join("reports");
    let contours_dir = ctx.out.join("contours");
    for d in [&enhanced_dir, &reports_dir, &contours_dir] {
        ensure_dir(d)?;
    }

    let n = result.sources.len();
    let chains: Vec<CliResult<(FeatureReport, Option<EnhancedFile>)>> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = result
                .sources
                .iter()
                .enumerate()
                .map(|(k, source)| {
                    let id = format!("s{}", k + 1);
                    let prov = provenance.derived(format!("separate: component {} of {n}", k + 1));
                    let scale = separation.outputs[k].wav_scale;
                    let (enhanced_dir, contours_dir) = (&enhanced_dir, &contours_dir);
                    scope.spawn(
                        move || -> CliResult<(FeatureReport, Option<EnhancedFile>)> {
                            let enhanced = match enhance(source, &ctx.cfg.enhance) {
                                Ok(e) => e,
                                Err(e) => {
                                    let r =
                                        failed_report(&id, source, "enhance", &e, &ctx.cfg, prov);
                                    return Ok((r, None));
                                }
                            };
                            let file = format!("{id}.wav");
                            write_wav(&enhanced.signal.scaled(scale)?, enhanced_dir.join(&file))?;
                            let a = analyze_signal(
                                &id,
                                &enhanced.signal,
                                &ctx.cfg,
                                prov.derived("enhance"),
                            );
                            write_contours(&a, contours_dir)?;
                            let summary = EnhancedFile {
                                summary: EnhanceSummary::new(file, &enhanced),
                                wav_scale: scale,
                            };
                            Ok((a.report, Some(summary)))
                        },
                    )
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("analysis thread panicked"))
                .collect()
        });

    let mut reports = Vec::new();
    let mut enhanced_files = Vec::new();
    for chain in chains {
        let (report, file) = chain?;
        write_bytes(
            &reports_dir.join(format!("{}.json", report.signal_id)),
            report.to_json()?.as_bytes(),
        )?;
        enhanced_files.extend(file);
        reports.push(report);
    }
    write_json(&enhanced_dir.join("enhance.json"), &enhanced_files)?;
    write_bytes(&ctx.out.join("comparison.csv"), &comparison_csv(&reports)?)?;
    Ok(PipelineOutput {
        separation,
        reports,
    })
}
