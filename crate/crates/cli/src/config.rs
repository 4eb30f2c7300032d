use std::path::Path;

use serde::{Deserialize, Serialize};
use voxsep::enhance::EnhanceParams;
use voxsep::ica::FastIcaParams;
use voxsep::pitch::PitchParams;
use voxsep::psycho::CalibrationSpec;

use crate::error::{CliError, CliResult};

/// Every tunable of the pipeline. Missing fields take their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Drives every random choice of a run; copied into `ica.seed`.
    pub seed: u64,
    pub ica: FastIcaParams,
    pub enhance: EnhanceParams,
    pub pitch: PitchParams,
    pub perturb: PerturbConfig,
    pub calibration: CalibrationSpec,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbConfig {
    /// Window of the PPQ/APQ perturbation quotients.
    pub pq_order: usize,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self { pq_order: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Peak level of separated sources written to WAV.
    pub wav_peak: f64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { wav_peak: 0.5 }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Usage(format!("invalid run config: {e}")))?;
        Ok(cfg.synced())
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.synced()
    }

    fn synced(mut self) -> Self {
        self.ica.seed = self.seed;
        self
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if !(self.output.wav_peak > 0.0 && self.output.wav_peak <= 1.0) {
            return bad(format!(
                "output.wav_peak must be in (0, 1], got {}",
                self.output.wav_peak
            ));
        }
        let k = self.perturb.pq_order;
        if k < 3 || k.is_multiple_of(2) {
            return bad(format!("perturb.pq_order must be odd and >= 3, got {k}"));
        }
        CalibrationSpec::new(self.calibration.dbfs_to_spl)?;
        Ok(())
    }
}
