use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::commands::analyze::{cmd_analyze, AnalyzeOptions};
use crate::commands::enhance::cmd_enhance;
use crate::commands::pipeline::cmd_pipeline;
use crate::commands::separate::cmd_separate;
use crate::commands::simulate::{simulate_demo, simulate_manifest, DemoOptions};
use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult, EXIT_INTERNAL, EXIT_OK, EXIT_USAGE};
use crate::io::{ensure_dir, write_json};

#[derive(Debug, Parser)]
#[command(
    name = "voxsep",
    version,
    about = "Separate multi-talker recordings and measure voice quality"
)]
pub struct Cli {
    /// Seed for every random choice (overrides the config and manifest).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Run configuration JSON.
    #[arg(long, global = true, value_name = "RUN_JSON")]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mix sources into sensor recordings.
    Simulate(SimulateArgs),
    /// Unmix sensor recordings with FastICA.
    Separate(SeparateArgs),
    /// Spectral-subtraction denoising of a mono recording.
    Enhance(EnhanceArgs),
    /// Compute voice metrics and write a feature report.
    Analyze(AnalyzeArgs),
    /// separate, enhance and analyze in one run.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scene manifest JSON.
    #[arg(required_unless_present = "demo", conflicts_with = "demo")]
    pub manifest: Option<PathBuf>,
    /// Use the built-in synthetic talkers and demo mixing matrix.
    #[arg(long)]
    pub demo: bool,
    /// Number of demo talkers (1 to 5).
    #[arg(long, default_value_t = 3, requires = "demo")]
    pub sources: usize,
    /// Demo length in seconds.
    #[arg(long, default_value_t = 5.0, requires = "demo")]
    pub duration: f64,
    /// Demo sample rate in Hz.
    #[arg(long, default_value_t = 44100, requires = "demo")]
    pub rate: u32,
    /// Per-sensor SNR of added white noise (demo only).
    #[arg(long, requires = "demo", allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SeparateArgs {
    /// Sensor WAV files; multi-channel files contribute every channel.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Number of sources to extract; defaults to the channel count.
    #[arg(long)]
    pub components: Option<usize>,
    /// Reference sources used to order and score the estimates.
    #[arg(long, num_args = 1..)]
    pub refs: Vec<PathBuf>,
    /// Contrast function: logcosh or gauss.
    #[arg(long)]
    pub contrast: Option<String>,
}

#[derive(Debug, Args)]
pub struct EnhanceArgs {
    /// Mono WAV to denoise.
    pub input: PathBuf,
    /// Output WAV; defaults to `<out>/<stem>_enhanced.wav`.
    pub output: Option<PathBuf>,
    /// Over-subtraction factor (at least 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Spectral floor as a fraction of the noisy magnitude.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Pause threshold relative to the median frame RMS.
    #[arg(long)]
    pub pause_theta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Sensor WAV files; multi-channel files contribute every channel.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Report path (single signal only); defaults to `<out>/<id>.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write F0 and loudness contours as CSV.
    #[arg(long)]
    pub csv: bool,
    /// Analyse all inputs joined end to end.
    #[arg(long)]
    pub concat: bool,
    /// dB SPL of a full-scale sine.
    #[arg(long)]
    pub calib_spl: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Sensor WAV files; multi-channel files contribute every channel.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Number of sources to extract; defaults to the channel count.
    #[arg(long)]
    pub components: Option<usize>,
    /// Reference sources used to order and score the estimates.
    #[arg(long, num_args = 1..)]
    pub refs: Vec<PathBuf>,
}

/// Wall-clock facts about a run, kept apart from the deterministic outputs.
#[derive(Debug, Serialize)]
struct RunInfo {
    command: &'static str,
    version: &'static str,
    started_unix_ms: u128,
    finished_unix_ms: u128,
    elapsed_ms: u128,
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Separate(_) => "separate",
            Command::Enhance(_) => "enhance",
            Command::Analyze(_) => "analyze",
            Command::Pipeline(_) => "pipeline",
        }
    }
}

fn context(cli: &Cli) -> CliResult<Context> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    match &cli.command {
        Command::Separate(a) => {
            if let Some(c) = &a.contrast {
                cfg.ica.contrast = c.parse()?;
            }
        }
        Command::Enhance(a) => {
            cfg.enhance.alpha = a.alpha.unwrap_or(cfg.enhance.alpha);
            cfg.enhance.beta = a.beta.unwrap_or(cfg.enhance.beta);
            cfg.enhance.pause_theta = a.pause_theta.unwrap_or(cfg.enhance.pause_theta);
        }
        Command::Analyze(a) => {
            if let Some(spl) = a.calib_spl {
                cfg.calibration.dbfs_to_spl = spl;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    let mut ctx = Context::new(cfg, &cli.out);
    ctx.seed_override = cli.seed;
    Ok(ctx)
}

/// Execute a parsed command line and return a one-line summary per output.
pub fn execute(cli: &Cli) -> CliResult<Vec<String>> {
    let ctx = context(cli)?;
    let started = unix_ms();
    let clock = Instant::now();
    let lines = match &cli.command {
        Command::Simulate(a) => {
            let meta = if a.demo {
                let opts = DemoOptions {
                    sources: a.sources,
                    duration_s: a.duration,
                    sample_rate: a.rate,
                    snr_db: a.snr_db,
                };
                simulate_demo(opts, &ctx)?
            } else {
                let path = a.manifest.as_ref().expect("clap requires manifest");
                simulate_manifest(path, &ctx)?
            };
            meta.sensors
                .iter()
                .map(|s| format!("wrote {}", ctx.out.join(&s.file).display()))
                .collect()
        }
        Command::Separate(a) => {
            let r = cmd_separate(&a.inputs, a.components, &a.refs, &ctx)?;
            let mut lines: Vec<String> = r
                .outputs
                .iter()
                .map(|o| {
                    format!(
                        "wrote {} (scale {:.6})",
                        ctx.out.join(&o.file).display(),
                        o.wav_scale
                    )
                })
                .collect();
            if let Some(s) = &r.score {
                lines.push(format!(
                    "min |r| {:.4}, mean SI-SDR {:.2} dB",
                    s.min_correlation(),
                    s.mean_si_sdr_db()
                ));
            }
            if !r.all_converged {
                lines.push("warning: not all components converged".into());
            }
            lines
        }
        Command::Enhance(a) => {
            let s = cmd_enhance(&a.input, a.output.as_deref(), &ctx)?;
            vec![format!(
                "wrote {} ({} of {} frames used as pauses{})",
                s.file,
                s.pause_frames,
                s.analysis_frames,
                if s.fallback { ", fallback" } else { "" }
            )]
        }
        Command::Analyze(a) => {
            let opts = AnalyzeOptions {
                report: a.report.clone(),
                csv: a.csv,
                concat: a.concat,
            };
            cmd_analyze(&a.inputs, &opts, &ctx)?
                .iter()
                .map(|r| {
                    format!(
                        "analysed {} ({} null features)",
                        r.signal_id,
                        r.null_reasons.len()
                    )
                })
                .collect()
        }
        Command::Pipeline(a) => {
            let out = cmd_pipeline(&a.inputs, a.components, &a.refs, &ctx)?;
            out.reports
                .iter()
                .map(|r| {
                    format!(
                        "analysed {} ({} null features)",
                        r.signal_id,
                        r.null_reasons.len()
                    )
                })
                .collect()
        }
    };
    ensure_dir(&ctx.out)?;
    let info = RunInfo {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        elapsed_ms: clock.elapsed().as_millis(),
    };
    write_json(&ctx.out.join("run_info.json"), &info)?;
    Ok(lines)
}

/// Parse arguments, run, print, and return the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match std::panic::catch_unwind(|| execute(&cli)) {
        Ok(Ok(lines)) => {
            for l in lines {
                println!("{l}");
            }
            EXIT_OK
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => {
            eprintln!("error: {}", CliError::Internal("unexpected failure".into()));
            EXIT_INTERNAL
        }
    }
}
