use std::path::{Path, PathBuf};

use voxsep::MonoSignal;

use super::Context;
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, load_signals, write_bytes, NamedSignal};
use crate::report::{analyze_signal, comparison_csv, Analysis, FeatureReport, Provenance};

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    /// Report path; only valid when a single signal is analysed.
    pub report: Option<PathBuf>,
    /// Also write `<id>_f0.csv` and `<id>_loudness.csv`.
    pub csv: bool,
    /// Join all inputs into one signal before analysis.
    pub concat: bool,
}

/// Write the F0 and loudness contours of an analysis as CSV files in `dir`.
pub fn write_contours(a: &Analysis, dir: &Path) -> CliResult<()> {
    ensure_dir(dir)?;
    let id = &a.report.signal_id;
    if let Some(c) = &a.contour {
        let mut buf = Vec::new();
        c.write_csv(&mut buf)?;
        write_bytes(&dir.join(format!("{id}_f0.csv")), &buf)?;
    }
    if let Some(l) = &a.loudness {
        let mut buf = Vec::new();
        l.write_csv(&mut buf)?;
        write_bytes(&dir.join(format!("{id}_loudness.csv")), &buf)?;
    }
    Ok(())
}

fn concatenated(signals: Vec<NamedSignal>) -> CliResult<NamedSignal> {
    let id = signals
        .iter()
        .map(|s| s.id.as_str())
        .collect::<Vec<_>>()
        .join("+");
    let parts: Vec<MonoSignal> = signals.into_iter().map(|s| s.signal).collect();
    Ok(NamedSignal {
        id,
        signal: MonoSignal::concat(&parts)?,
    })
}

pub fn cmd_analyze(
    inputs: &[PathBuf],
    opts: &AnalyzeOptions,
    ctx: &Context,
) -> CliResult<Vec<FeatureReport>> {
    let (mut signals, digests) = load_signals(inputs)?;
    if opts.concat && signals.len() > 1 {
        signals = vec![concatenated(signals)?];
    }
    if opts.report.is_some() && signals.len() != 1 {
        return Err(CliError::Usage(format!(
            "--report names one file but {} signals were given; use --concat or omit --report",
            signals.len()
        )));
    }
    let mut provenance = Provenance::new("analyze", &ctx.cfg, digests);
    if opts.concat {
        provenance = provenance.derived("concat");
    }
    let mut reports = Vec::new();
    for s in &signals {
        let a = analyze_signal(&s.id, &s.signal, &ctx.cfg, provenance.clone());
        let path = match &opts.report {
            Some(p) => p.clone(),
            None => {
                ensure_dir(&ctx.out)?;
                ctx.out.join(format!("{}.json", s.id))
            }
        };
        write_bytes(&path, a.report.to_json()?.as_bytes())?;
        if opts.csv {
            write_contours(&a, &ctx.out)?;
        }
        reports.push(a.report);
    }
    if reports.len() > 1 {
        write_bytes(&ctx.out.join("comparison.csv"), &comparison_csv(&reports)?)?;
    }
    Ok(reports)
}
