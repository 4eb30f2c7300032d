//! Spectral-subtraction noise reduction.
//!
//! A noise magnitude spectrum is averaged over speech pauses and subtracted
//! from every short-time magnitude spectrum:
//!
//! ```text
//! |Ŝ| = max(|X| - α|N̂|, β|X|),   arg Ŝ = arg X
//! ```
//!
//! and the result is resynthesized by overlap-add.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{frame_count, istft, stft, MonoSignal, Spectrogram, WindowKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnhanceParams {
    pub fft_size: usize,
    pub hop: usize,
    /// Over-subtraction factor.
    pub alpha: f64,
    /// Spectral floor as a fraction of the noisy magnitude.
    pub beta: f64,
    /// A frame is a pause when its RMS is below `pause_theta` times the median frame RMS.
    pub pause_theta: f64,
    pub pause_frame_ms: f64,
    pub pause_hop_ms: f64,
}

impl Default for EnhanceParams {
    fn default() -> Self {
        Self {
            fft_size: 2048,
            hop: 1024,
            alpha: 2.0,
            beta: 0.02,
            pause_theta: 0.25,
            pause_frame_ms: 32.0,
            pause_hop_ms: 16.0,
        }
    }
}

/// Per-frame pause flags from [`detect_pauses`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauseMask {
    pub pauses: Vec<bool>,
    pub frame_length: usize,
    pub hop: usize,
    pub sample_rate: u32,
    /// True when no frame passed the threshold and the quietest decile was used.
    pub fallback: bool,
}

impl PauseMask {
    pub fn len(&self) -> usize {
        self.pauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pauses.is_empty()
    }

    pub fn pause_count(&self) -> usize {
        self.pauses.iter().filter(|p| **p).count()
    }

    pub fn frame_start_s(&self, i: usize) -> f64 {
        (i * self.hop) as f64 / self.sample_rate as f64
    }

    /// Per-sample flags: sample `t` takes the flag of frame `t / hop`.
    fn sample_flags(&self, n: usize) -> Vec<bool> {
        if self.pauses.is_empty() {
            return vec![false; n];
        }
        let last = self.pauses.len() - 1;
        (0..n)
            .map(|t| self.pauses[(t / self.hop).min(last)])
            .collect()
    }
}

/// Mean noise magnitude per STFT bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    pub magnitudes: Vec<f64>,
    pub frames_used: usize,
    pub fft_size: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl NoiseProfile {
    pub fn zeros(fft_size: usize, hop: usize, sample_rate: u32) -> Self {
        Self {
            magnitudes: vec![0.0; fft_size / 2 + 1],
            frames_used: 1,
            fft_size,
            hop,
            sample_rate,
        }
    }
}

fn ms_to_samples(ms: f64, rate: u32) -> usize {
    (ms * rate as f64 / 1000.0).round() as usize
}

/// Energy-threshold pause detector with a quietest-decile fallback.
pub fn detect_pauses(
    signal: &MonoSignal,
    frame_ms: f64,
    hop_ms: f64,
    theta: f64,
) -> Result<PauseMask> {
    if !(frame_ms > 0.0 && hop_ms > 0.0 && hop_ms <= frame_ms) || !(theta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "invalid pause settings: frame {frame_ms} ms, hop {hop_ms} ms, theta {theta}"
        )));
    }
    let rate = signal.sample_rate();
    let len = ms_to_samples(frame_ms, rate).max(1);
    let hop = ms_to_samples(hop_ms, rate).clamp(1, len);
    let x = signal.samples();
    if x.len() < len {
        return Err(Error::InsufficientData {
            needed: len,
            have: x.len(),
        });
    }
    let count = frame_count(x.len(), len, hop);
    let rms: Vec<f64> = (0..count)
        .map(|i| {
            let seg = &x[i * hop..(i * hop + len).min(x.len())];
            (seg.iter().map(|v| v * v).sum::<f64>() / seg.len() as f64).sqrt()
        })
        .collect();
    let mut sorted = rms.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if count % 2 == 1 {
        sorted[count / 2]
    } else {
        0.5 * (sorted[count / 2 - 1] + sorted[count / 2])
    };
    let mut pauses: Vec<bool> = if median > 0.0 {
        rms.iter().map(|r| *r < theta * median).collect()
    } else {
        rms.iter().map(|r| *r == 0.0).collect()
    };
    let mut fallback = false;
    if !pauses.iter().any(|p| *p) {
        fallback = true;
        let quota = count.div_ceil(10).max(1);
        let mut order: Vec<usize> = (0..count).collect();
        order.sort_by(|&a, &b| rms[a].total_cmp(&rms[b]).then(a.cmp(&b)));
        for &i in &order[..quota] {
            pauses[i] = true;
        }
    }
    Ok(PauseMask {
        pauses,
        frame_length: len,
        hop,
        sample_rate: rate,
        fallback,
    })
}

/// Average STFT magnitudes over the frames that lie in pauses.
///
/// Frames fully inside the signal and fully covered by pauses are preferred;
/// failing that, frames whose in-signal span is all pause; failing that, the
/// frames with the largest pause fraction.
pub fn estimate_noise_profile(
    signal: &MonoSignal,
    mask: &PauseMask,
    fft_size: usize,
    hop: usize,
) -> Result<NoiseProfile> {
    if mask.pause_count() == 0 {
        return Err(Error::EmptyPauseMask);
    }
    if mask.sample_rate != signal.sample_rate() {
        return Err(Error::ProfileMismatch(format!(
            "pause mask at {} Hz, signal at {} Hz",
            mask.sample_rate,
            signal.sample_rate()
        )));
    }
    let spec = stft(signal, fft_size, hop, WindowKind::Hann)?;
    let n = signal.len() as isize;
    let flags = mask.sample_flags(signal.len());
    let half = (fft_size / 2) as isize;
    // (fraction of in-signal span that is pause, frame lies fully inside the signal)
    let coverage: Vec<(f64, bool)> = (0..spec.frames.len())
        .map(|m| {
            let c = (m * hop) as isize;
            let (lo, hi) = ((c - half).max(0), (c + half).min(n));
            let total = (hi - lo).max(1) as f64;
            let paused = (lo..hi).filter(|&t| flags[t as usize]).count() as f64;
            (paused / total, c - half >= 0 && c + half <= n)
        })
        .collect();
    let mut chosen: Vec<usize> = (0..coverage.len())
        .filter(|&m| coverage[m].0 >= 1.0 && coverage[m].1)
        .collect();
    if chosen.is_empty() {
        chosen = (0..coverage.len())
            .filter(|&m| coverage[m].0 >= 1.0)
            .collect();
    }
    if chosen.is_empty() {
        let best = coverage.iter().map(|c| c.0).fold(0.0, f64::max);
        if best <= 0.0 {
            return Err(Error::EmptyPauseMask);
        }
        chosen = (0..coverage.len())
            .filter(|&m| coverage[m].0 == best)
            .collect();
    }
    let mut magnitudes = vec![0.0; spec.bins()];
    for &m in &chosen {
        for (acc, c) in magnitudes.iter_mut().zip(&spec.frames[m]) {
            *acc += c.norm();
        }
    }
    for v in &mut magnitudes {
        *v /= chosen.len() as f64;
    }
    Ok(NoiseProfile {
        magnitudes,
        frames_used: chosen.len(),
        fft_size,
        hop,
        sample_rate: signal.sample_rate(),
    })
}

fn check_gains(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha >= 1.0 && alpha.is_finite()) || !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "need alpha >= 1 and 0 <= beta < 1, got alpha {alpha}, beta {beta}"
        )));
    }
    Ok(())
}

/// Apply the subtraction rule to every frame of a spectrogram.
pub fn subtract_spectrogram(
    spec: &Spectrogram,
    profile: &NoiseProfile,
    alpha: f64,
    beta: f64,
) -> Result<Spectrogram> {
    check_gains(alpha, beta)?;
    if profile.fft_size != spec.fft_size
        || profile.sample_rate != spec.sample_rate
        || profile.magnitudes.len() != spec.bins()
    {
        return Err(Error::ProfileMismatch(format!(
            "profile is {} points at {} Hz, analysis is {} points at {} Hz",
            profile.fft_size, profile.sample_rate, spec.fft_size, spec.sample_rate
        )));
    }
    let frames = spec
        .frames
        .iter()
        .map(|frame| {
            frame
                .iter()
                .zip(&profile.magnitudes)
                .map(|(x, nm)| {
                    let mag = x.norm();
                    if mag == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let target = (mag - alpha * nm).max(beta * mag);
                    x * (target / mag)
                })
                .collect()
        })
        .collect();
    Ok(Spectrogram {
        frames,
        ..spec.clone()
    })
}

/// Denoise `noisy` with a previously estimated profile.
pub fn spectral_subtract(
    noisy: &MonoSignal,
    profile: &NoiseProfile,
    alpha: f64,
    beta: f64,
) -> Result<MonoSignal> {
    check_gains(alpha, beta)?;
    if profile.sample_rate != noisy.sample_rate() {
        return Err(Error::ProfileMismatch(format!(
            "profile at {} Hz, signal at {} Hz",
            profile.sample_rate,
            noisy.sample_rate()
        )));
    }
    let spec = stft(noisy, profile.fft_size, profile.hop, WindowKind::Hann)?;
    istft(&subtract_spectrogram(&spec, profile, alpha, beta)?)
}

#[derive(Debug, Clone)]
pub struct Enhanced {
    pub signal: MonoSignal,
    pub mask: PauseMask,
    pub profile: NoiseProfile,
}

/// Pause detection, profiling and subtraction on one recording.
pub fn enhance(signal: &MonoSignal, params: &EnhanceParams) -> Result<Enhanced> {
    let mask = detect_pauses(
        signal,
        params.pause_frame_ms,
        params.pause_hop_ms,
        params.pause_theta,
    )?;
    let profile = estimate_noise_profile(signal, &mask, params.fft_size, params.hop)?;
    let out = spectral_subtract(signal, &profile, params.alpha, params.beta)?;
    Ok(Enhanced {
        signal: out,
        mask,
        profile,
    })
}

/// Mean per-frame SNR of `test` against `clean`, each frame clamped to [-10, 35] dB.
pub fn segmental_snr_db(clean: &[f64], test: &[f64], frame_len: usize) -> Result<f64> {
    if clean.len() != test.len() {
        return Err(Error::LengthMismatch {
            left: clean.len(),
            right: test.len(),
        });
    }
    if frame_len == 0 || clean.len() < frame_len {
        return Err(Error::InsufficientData {
            needed: frame_len.max(1),
            have: clean.len(),
        });
    }
    let frames = clean.len() / frame_len;
    let total: f64 = (0..frames)
        .map(|f| {
            let r = f * frame_len..(f + 1) * frame_len;
            let sig: f64 = clean[r.clone()].iter().map(|v| v * v).sum();
            let err: f64 = clean[r.clone()]
                .iter()
                .zip(&test[r])
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            let snr = if err == 0.0 {
                35.0
            } else if sig == 0.0 {
                -10.0
            } else {
                10.0 * (sig / err).log10()
            };
            snr.clamp(-10.0, 35.0)
        })
        .sum();
    Ok(total / frames as f64)
}
