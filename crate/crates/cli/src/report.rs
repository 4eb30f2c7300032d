use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use voxsep::perturb::{classical_keys, classical_set_with_order, extract_cycles};
use voxsep::pitch::{estimate_f0_contour, PitchContour};
use voxsep::psycho::{loudness, semitone_sd, sharpness, LoudnessAnalysis};
use voxsep::MonoSignal;

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::io::InputDigest;

pub const REPORT_SCHEMA_VERSION: &str = "1.0.0";
pub const TOOL_NAME: &str = "voxsep";

/// Where a report came from. Contains no timestamps so reruns compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub inputs: Vec<InputDigest>,
    /// Processing steps that produced the analysed signal, in order.
    pub derivation: Vec<String>,
}

impl Provenance {
    pub fn new(command: &str, cfg: &RunConfig, inputs: Vec<InputDigest>) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: cfg.seed,
            config: cfg.clone(),
            inputs,
            derivation: Vec::new(),
        }
    }

    pub fn derived(&self, step: impl Into<String>) -> Self {
        let mut p = self.clone();
        p.derivation.push(step.into());
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F0Summary {
    pub mean_hz: Option<f64>,
    pub min_hz: Option<f64>,
    pub max_hz: Option<f64>,
    pub voiced_fraction: Option<f64>,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoudnessSummary {
    pub mean_phon: Option<f64>,
    pub long_term_sone: Option<f64>,
    pub long_term_phon: Option<f64>,
    /// Calibration used: level in dB SPL of a full-scale sine.
    pub dbfs_to_spl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub code: String,
    pub message: String,
}

/// Voice metrics of one signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureReport {
    pub schema_version: String,
    pub signal_id: String,
    pub sample_rate: u32,
    pub duration_s: f64,
    pub f0: F0Summary,
    pub jitter: BTreeMap<String, Option<f64>>,
    pub shimmer: BTreeMap<String, Option<f64>>,
    pub semitone_sd: Option<f64>,
    pub loudness: LoudnessSummary,
    pub sharpness_acum: Option<f64>,
    /// Reason code for every null feature, keyed by feature name.
    pub null_reasons: BTreeMap<String, String>,
    pub stage_errors: Vec<StageError>,
    pub provenance: Provenance,
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureValue {
    pub name: String,
    pub value: Option<f64>,
    pub unit: &'static str,
}

/// Report plus the intermediate data behind it.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: FeatureReport,
    pub contour: Option<PitchContour>,
    pub loudness: Option<LoudnessAnalysis>,
}

struct Nulls(BTreeMap<String, String>);

impl Nulls {
    fn take(&mut self, key: &str, v: Result<f64, &str>) -> Option<f64> {
        match v {
            Ok(x) if x.is_finite() => Some(x),
            Ok(_) => {
                self.0.insert(key.into(), "non_finite".into());
                None
            }
            Err(code) => {
                self.0.insert(key.into(), code.into());
                None
            }
        }
    }
}

fn split_keys(k: usize) -> (Vec<String>, Vec<String>) {
    let mut jitter = Vec::new();
    let mut shimmer = Vec::new();
    for (key, _) in classical_keys(k) {
        if let Some(rest) = key.strip_prefix("jitter.") {
            jitter.push(rest.to_string());
        } else if let Some(rest) = key.strip_prefix("shimmer.") {
            shimmer.push(rest.to_string());
        }
    }
    (jitter, shimmer)
}

fn stage_error(stage: &str, e: &voxsep::Error) -> StageError {
    StageError {
        stage: stage.into(),
        code: e.code().into(),
        message: e.to_string(),
    }
}

/// Run pitch, perturbation, semitone and loudness analysis on one signal.
///
/// Failures never abort: the affected features become null with a reason
/// code and the failing stage is listed in `stage_errors`.
pub fn analyze_signal(
    id: &str,
    signal: &MonoSignal,
    cfg: &RunConfig,
    provenance: Provenance,
) -> Analysis {
    let k = cfg.perturb.pq_order;
    let mut nulls = Nulls(BTreeMap::new());
    let mut stage_errors = Vec::new();

    let contour = estimate_f0_contour(signal, &cfg.pitch);
    if let Err(e) = &contour {
        stage_errors.push(stage_error("pitch", e));
    }
    let contour = contour.map_err(|e| e.code());

    let voiced = contour.as_ref().map(|c| c.voiced_f0()).map_err(|c| *c);
    let stat = |f: fn(&[f64]) -> f64| match &voiced {
        Ok(v) if v.is_empty() => Err("no_voiced_frames"),
        Ok(v) => Ok(f(v)),
        Err(c) => Err(*c),
    };
    let f0 = F0Summary {
        mean_hz: nulls.take(
            "f0.mean_hz",
            stat(|v| v.iter().sum::<f64>() / v.len() as f64),
        ),
        min_hz: nulls.take(
            "f0.min_hz",
            stat(|v| v.iter().copied().fold(f64::INFINITY, f64::min)),
        ),
        max_hz: nulls.take(
            "f0.max_hz",
            stat(|v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        ),
        voiced_fraction: nulls.take(
            "f0.voiced_fraction",
            contour
                .as_ref()
                .map(|c| c.voiced_fraction())
                .map_err(|c| *c),
        ),
        frames: contour.as_ref().map(|c| c.len()).unwrap_or(0),
    };

    let perturbation: Result<BTreeMap<String, f64>, &str> =
        contour.as_ref().map_err(|c| *c).and_then(|c| {
            extract_cycles(signal, c)
                .and_then(|cy| classical_set_with_order(&cy, k))
                .map_err(|e| e.code())
        });
    let (jitter_keys, shimmer_keys) = split_keys(k);
    let mut group = |prefix: &str, keys: &[String]| -> BTreeMap<String, Option<f64>> {
        keys.iter()
            .map(|key| {
                let full = format!("{prefix}.{key}");
                let v = match &perturbation {
                    Ok(map) => Ok(map[&full]),
                    Err(c) => Err(*c),
                };
                (key.clone(), nulls.take(&full, v))
            })
            .collect()
    };
    let jitter = group("jitter", &jitter_keys);
    let shimmer = group("shimmer", &shimmer_keys);

    let st = contour
        .as_ref()
        .map_err(|c| *c)
        .and_then(|c| semitone_sd(c).map_err(|e| e.code()));
    let semitone = nulls.take("semitone_sd", st);

    let analysis = loudness(signal, &cfg.calibration);
    if let Err(e) = &analysis {
        stage_errors.push(stage_error("loudness", e));
    }
    let audible = analysis.as_ref().map_err(|e| e.code()).and_then(|a| {
        if a.silent {
            Err(voxsep::Error::ZeroLoudness.code())
        } else {
            Ok(a)
        }
    });
    let loud = LoudnessSummary {
        mean_phon: nulls.take("loudness.mean_phon", audible.map(|a| a.mean_phon)),
        long_term_sone: nulls.take(
            "loudness.long_term_sone",
            audible.map(|a| a.long_term.total_sone),
        ),
        long_term_phon: nulls.take("loudness.long_term_phon", audible.map(|a| a.long_term.phon)),
        dbfs_to_spl: cfg.calibration.dbfs_to_spl,
    };
    let sharp = audible.and_then(|a| sharpness(&a.long_term).map_err(|e| e.code()));
    let sharpness_acum = nulls.take("sharpness_acum", sharp);

    let report = FeatureReport {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        signal_id: id.into(),
        sample_rate: signal.sample_rate(),
        duration_s: signal.duration_s(),
        f0,
        jitter,
        shimmer,
        semitone_sd: semitone,
        loudness: loud,
        sharpness_acum,
        null_reasons: nulls.0,
        stage_errors,
        provenance,
    };
    Analysis {
        report,
        contour: contour.ok(),
        loudness: analysis.ok(),
    }
}

/// Report for a signal whose processing chain failed before analysis.
pub fn failed_report(
    id: &str,
    signal: &MonoSignal,
    stage: &str,
    err: &voxsep::Error,
    cfg: &RunConfig,
    provenance: Provenance,
) -> FeatureReport {
    let code = err.code();
    let (jitter_keys, shimmer_keys) = split_keys(cfg.perturb.pq_order);
    let mut null_reasons = BTreeMap::new();
    let nulled = |keys: &[String]| keys.iter().map(|k| (k.clone(), None)).collect();
    let report = FeatureReport {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        signal_id: id.into(),
        sample_rate: signal.sample_rate(),
        duration_s: signal.duration_s(),
        f0: F0Summary {
            mean_hz: None,
            min_hz: None,
            max_hz: None,
            voiced_fraction: None,
            frames: 0,
        },
        jitter: nulled(&jitter_keys),
        shimmer: nulled(&shimmer_keys),
        semitone_sd: None,
        loudness: LoudnessSummary {
            mean_phon: None,
            long_term_sone: None,
            long_term_phon: None,
            dbfs_to_spl: cfg.calibration.dbfs_to_spl,
        },
        sharpness_acum: None,
        null_reasons: BTreeMap::new(),
        stage_errors: vec![stage_error(stage, err)],
        provenance,
    };
    for f in report.features() {
        if f.value.is_none() {
            null_reasons.insert(f.name, code.to_string());
        }
    }
    FeatureReport {
        null_reasons,
        ..report
    }
}

impl FeatureReport {
    /// All numeric features in table order.
    pub fn features(&self) -> Vec<FeatureValue> {
        let mut out = Vec::new();
        let mut push = |name: String, value: Option<f64>, unit: &'static str| {
            out.push(FeatureValue { name, value, unit })
        };
        push("duration_s".into(), Some(self.duration_s), "s");
        push("f0.mean_hz".into(), self.f0.mean_hz, "Hz");
        push("f0.min_hz".into(), self.f0.min_hz, "Hz");
        push("f0.max_hz".into(), self.f0.max_hz, "Hz");
        push("f0.voiced_fraction".into(), self.f0.voiced_fraction, "1");
        for (key, unit) in classical_keys(self.provenance.config.perturb.pq_order) {
            let value = match key.split_once('.') {
                Some(("jitter", rest)) => self.jitter.get(rest).copied().flatten(),
                Some(("shimmer", rest)) => self.shimmer.get(rest).copied().flatten(),
                _ => None,
            };
            push(key, value, unit);
        }
        push("semitone_sd".into(), self.semitone_sd, "st");
        push("loudness.mean_phon".into(), self.loudness.mean_phon, "phon");
        push(
            "loudness.long_term_sone".into(),
            self.loudness.long_term_sone,
            "sone",
        );
        push(
            "loudness.long_term_phon".into(),
            self.loudness.long_term_phon,
            "phon",
        );
        push("sharpness_acum".into(), self.sharpness_acum, "acum");
        out
    }

    /// Every null feature has a reason and every value is finite.
    pub fn is_consistent(&self) -> bool {
        self.features().iter().all(|f| match f.value {
            Some(v) => v.is_finite() && !self.null_reasons.contains_key(&f.name),
            None => self.null_reasons.contains_key(&f.name),
        })
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Long-format table `signal_id,feature,value,unit`; nulls are empty cells.
pub fn comparison_csv(reports: &[FeatureReport]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["signal_id", "feature", "value", "unit"])?;
    for r in reports {
        for f in r.features() {
            let value = f.value.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([r.signal_id.as_str(), &f.name, &value, f.unit])?;
        }
    }
    w.into_inner()
        .map_err(|e| crate::error::CliError::Internal(format!("csv: {e}")))
}
