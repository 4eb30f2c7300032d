//! Semitone pitch scale, Zwicker loudness (sone/phon) and sharpness (acum).
//!
//! Loudness follows the stationary Zwicker procedure on blocks of 2048
//! samples: third-octave band levels are merged into 20 critical bands,
//! corrected for free-field transmission, spread towards higher critical-band
//! rates and turned into specific loudness
//!
//! ```text
//! N'(z) = 0.08 · E_TQ^0.23 · [(0.5 + 0.5 E/E_TQ)^0.23 - 1]   sone/Bark
//! ```
//!
//! on a 0.1 Bark grid, integrated to total loudness `N`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pitch::PitchContour;
use crate::signal::stft::RealFft;
use crate::signal::{hann_window, MonoSignal};

pub const BLOCK_SIZE: usize = 2048;
pub const BLOCK_HOP: usize = 1024;

const Z_STEP: f64 = 0.1;
const Z_POINTS: usize = 241;
const THIRD_OCTAVE_BANDS: usize = 28;

/// Upper edges of the 20 critical bands, Bark.
const ZUP: [f64; 20] = [
    0.9, 1.8, 2.8, 3.5, 4.4, 5.4, 6.6, 7.9, 9.2, 10.6, 12.3, 13.8, 15.2, 16.7, 18.1, 19.3, 20.6,
    21.8, 22.7, 23.6,
];
/// Threshold in quiet per critical band, dB.
const LTQ: [f64; 20] = [
    30.0, 18.0, 12.0, 8.0, 7.0, 6.0, 5.0, 4.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0,
    3.0, 3.0,
];
/// Free-field transmission to the eardrum, dB (subtracted).
const A0: [f64; 20] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.5, -1.6, -3.2, -5.4, -5.6, -4.0, -1.5,
    2.0, 5.0, 12.0,
];
/// Centre frequencies of the three merged low bands, Hz.
const LOW_CENTRES: [f64; 3] = [50.0, 125.0, 225.0];

/// p = 69 + 12 log2(f0 / 440).
pub fn semitone(f0: f64) -> Result<f64> {
    if !(f0 > 0.0) || !f0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "f0 must be positive, got {f0}"
        )));
    }
    Ok(69.0 + 12.0 * (f0 / 440.0).log2())
}

/// Population standard deviation of the semitone values of voiced frames.
pub fn semitone_sd(contour: &PitchContour) -> Result<f64> {
    let p = contour
        .voiced_f0()
        .into_iter()
        .map(semitone)
        .collect::<Result<Vec<_>>>()?;
    if p.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            have: p.len(),
        });
    }
    let m = p.iter().sum::<f64>() / p.len() as f64;
    Ok((p.iter().map(|v| (v - m).powi(2)).sum::<f64>() / p.len() as f64).sqrt())
}

/// Level in dB SPL assigned to a full-scale sine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSpec {
    pub dbfs_to_spl: f64,
}

impl Default for CalibrationSpec {
    fn default() -> Self {
        Self { dbfs_to_spl: 94.0 }
    }
}

impl CalibrationSpec {
    pub fn new(dbfs_to_spl: f64) -> Result<Self> {
        if !(dbfs_to_spl > 0.0) || !dbfs_to_spl.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "calibration must be a positive level, got {dbfs_to_spl}"
            )));
        }
        Ok(Self { dbfs_to_spl })
    }

    /// Peak amplitude of a sine at `spl` dB under this calibration.
    pub fn sine_amplitude(&self, spl: f64) -> f64 {
        10f64.powf((spl - self.dbfs_to_spl) / 20.0)
    }
}

/// Specific loudness on the 0–24 Bark grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecificLoudness {
    /// sone/Bark at `z = 0.1 k`, `k = 0..=240`.
    pub values: Vec<f64>,
    pub total_sone: f64,
    pub phon: f64,
}

impl SpecificLoudness {
    pub fn z(k: usize) -> f64 {
        k as f64 * Z_STEP
    }

    pub fn grid() -> Vec<f64> {
        (0..Z_POINTS).map(Self::z).collect()
    }

    /// Wrap values sampled on [`SpecificLoudness::grid`].
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() != Z_POINTS || values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "specific loudness needs {Z_POINTS} non-negative values"
            )));
        }
        let total_sone = trapezoid(&values);
        Ok(Self {
            phon: sone_to_phon(total_sone),
            values,
            total_sone,
        })
    }
}

fn trapezoid(y: &[f64]) -> f64 {
    y.windows(2).map(|w| 0.5 * (w[0] + w[1]) * Z_STEP).sum()
}

/// Loudness level for a loudness in sone; 0 sone maps to 0 phon.
pub fn sone_to_phon(n: f64) -> f64 {
    if n <= 0.0 {
        0.0
    } else if n >= 1.0 {
        40.0 + 10.0 * n.log2()
    } else {
        40.0 * (n + 0.0005).powf(0.35)
    }
}

/// Inverse of [`sone_to_phon`].
pub fn phon_to_sone(phon: f64) -> f64 {
    if phon >= 40.0 {
        2f64.powf((phon - 40.0) / 10.0)
    } else {
        ((phon / 40.0).max(0.0).powf(1.0 / 0.35) - 0.0005).max(0.0)
    }
}

/// Centre frequencies of the 28 third-octave bands, 25 Hz to 12.5 kHz.
pub fn third_octave_centres() -> [f64; THIRD_OCTAVE_BANDS] {
    std::array::from_fn(|b| 1000.0 * 2f64.powf((b as f64 - 16.0) / 3.0))
}

/// Band intensities (linear, relative to 0 dB SPL) from a one-sided power spectrum.
fn band_intensities(
    power: &[f64],
    fft_size: usize,
    rate: f64,
    calib: &CalibrationSpec,
) -> [f64; THIRD_OCTAVE_BANDS] {
    let centres = third_octave_centres();
    let reference = 10f64.powf(calib.dbfs_to_spl / 10.0) / 0.5;
    let edge = 2f64.powf(1.0 / 6.0);
    std::array::from_fn(|b| {
        let (lo, hi) = (centres[b] / edge, centres[b] * edge);
        let s: f64 = power
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let f = *k as f64 * rate / fft_size as f64;
                f >= lo && f < hi
            })
            .map(|(_, p)| p)
            .sum();
        s * reference
    })
}

/// Third-octave band levels in dB SPL (`-inf` for empty bands).
pub fn third_octave_levels(
    power: &[f64],
    fft_size: usize,
    rate: f64,
    calib: &CalibrationSpec,
) -> [f64; THIRD_OCTAVE_BANDS] {
    band_intensities(power, fft_size, rate, calib).map(|i| 10.0 * i.log10())
}

/// Specific loudness from third-octave band levels in dB SPL.
pub fn specific_loudness(levels: &[f64; THIRD_OCTAVE_BANDS]) -> SpecificLoudness {
    let i: Vec<f64> = levels.iter().map(|l| 10f64.powf(l / 10.0)).collect();
    let centres = third_octave_centres();
    let mut cb = vec![
        i[0..6].iter().sum::<f64>(),
        i[6..9].iter().sum(),
        i[9..11].iter().sum(),
    ];
    cb.extend_from_slice(&i[11..]);
    let fcb: Vec<f64> = LOW_CENTRES
        .iter()
        .copied()
        .chain(centres[11..].iter().copied())
        .collect();

    let mut excitation = vec![0.0; Z_POINTS];
    for band in 0..20 {
        if !(cb[band] > 0.0) {
            continue;
        }
        let level = 10.0 * cb[band].log10() - A0[band];
        let lower = if band == 0 { 0.0 } else { ZUP[band - 1] };
        let upper = ZUP[band];
        // upper slope flattens with level; floored so it never turns upward
        let slope = (24.0 + 230.0 / fcb[band] - 0.2 * level).max(5.0);
        for (k, e) in excitation.iter_mut().enumerate() {
            let z = SpecificLoudness::z(k);
            if z < lower {
                continue;
            }
            let l = if z <= upper {
                level
            } else {
                level - slope * (z - upper)
            };
            *e += 10f64.powf(l / 10.0);
        }
    }
    let values: Vec<f64> = excitation
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let z = SpecificLoudness::z(k);
            let band = ZUP.partition_point(|&u| u <= z).min(19);
            let etq = 10f64.powf(LTQ[band] / 10.0);
            let n = 0.08 * etq.powf(0.23) * ((0.5 + 0.5 * e / etq).powf(0.23) - 1.0);
            n.max(0.0)
        })
        .collect();
    SpecificLoudness::from_values(values).expect("finite non-negative by construction")
}

/// S = 0.11 ∫ N'(z) g(z) z dz / ∫ N'(z) dz, acum.
pub fn sharpness(spec: &SpecificLoudness) -> Result<f64> {
    if spec.values.len() != Z_POINTS {
        return Err(Error::InvalidParameter(
            "specific loudness grid has the wrong size".into(),
        ));
    }
    let total = trapezoid(&spec.values);
    if !(total > 0.0) {
        return Err(Error::ZeroLoudness);
    }
    let weighted: Vec<f64> = spec
        .values
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let z = SpecificLoudness::z(k);
            let g = if z <= 15.8 {
                1.0
            } else {
                0.15 * (0.42 * (z - 15.8)).exp() + 0.85
            };
            n * g * z
        })
        .collect();
    Ok(0.11 * trapezoid(&weighted) / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoudnessBlock {
    /// Block centre, seconds.
    pub time_s: f64,
    pub sone: f64,
    pub phon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoudnessAnalysis {
    pub blocks: Vec<LoudnessBlock>,
    /// Mean phon over blocks with non-zero loudness; 0 when every block is silent.
    pub mean_phon: f64,
    pub silent: bool,
    /// Specific loudness of the long-term average spectrum.
    pub long_term: SpecificLoudness,
    pub calibration: CalibrationSpec,
}

impl LoudnessAnalysis {
    /// Write `block_time_s,sone,phon`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        w.write_record(["block_time_s", "sone", "phon"])
            .map_err(io)?;
        for b in &self.blocks {
            w.write_record([
                format!("{:.6}", b.time_s),
                format!("{:.6}", b.sone),
                format!("{:.6}", b.phon),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        Ok(())
    }
}

/// Block-wise loudness contour plus the loudness of the long-term spectrum.
pub fn loudness(signal: &MonoSignal, calib: &CalibrationSpec) -> Result<LoudnessAnalysis> {
    let calib = CalibrationSpec::new(calib.dbfs_to_spl)?;
    let x = signal.samples();
    if x.len() < BLOCK_SIZE {
        return Err(Error::InsufficientData {
            needed: BLOCK_SIZE,
            have: x.len(),
        });
    }
    let rate = signal.sample_rate() as f64;
    let w = hann_window(BLOCK_SIZE)?;
    let norm = 2.0 / (BLOCK_SIZE as f64 * w.iter().map(|v| v * v).sum::<f64>());
    let fft = RealFft::new(BLOCK_SIZE);
    let bins = BLOCK_SIZE / 2 + 1;
    let mut average = vec![0.0; bins];
    let mut blocks = Vec::new();
    let mut start = 0;
    while start + BLOCK_SIZE <= x.len() {
        let frame: Vec<f64> = x[start..start + BLOCK_SIZE]
            .iter()
            .zip(&w)
            .map(|(a, b)| a * b)
            .collect();
        let mut power: Vec<f64> = fft
            .forward(&frame)
            .iter()
            .map(|c| c.norm_sqr() * norm)
            .collect();
        power[0] /= 2.0;
        power[bins - 1] /= 2.0;
        for (acc, p) in average.iter_mut().zip(&power) {
            *acc += p;
        }
        let spec = specific_loudness(&third_octave_levels(&power, BLOCK_SIZE, rate, &calib));
        blocks.push(LoudnessBlock {
            time_s: (start + BLOCK_SIZE / 2) as f64 / rate,
            sone: spec.total_sone,
            phon: spec.phon,
        });
        start += BLOCK_HOP;
    }
    for v in &mut average {
        *v /= blocks.len() as f64;
    }
    let long_term = specific_loudness(&third_octave_levels(&average, BLOCK_SIZE, rate, &calib));
    let audible: Vec<f64> = blocks
        .iter()
        .filter(|b| b.sone > 0.0)
        .map(|b| b.phon)
        .collect();
    let silent = audible.is_empty();
    let mean_phon = if silent {
        0.0
    } else {
        audible.iter().sum::<f64>() / audible.len() as f64
    };
    Ok(LoudnessAnalysis {
        blocks,
        mean_phon,
        silent,
        long_term,
        calibration: calib,
    })
}
