//! Waveform types, framing and windowing shared by every analysis stage.

pub(crate) mod stft;
mod wav;

pub use stft::{istft, stft, Spectrogram, WindowKind};
pub use wav::{decode_wav, encode_wav, load_wav, write_atomic, write_wav};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sampled mono waveform.
///
/// Samples are nominally in `[-1, 1]` and are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonoSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl MonoSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidSignal("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Silent signal of `len` samples.
    pub fn zeros(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Arithmetic mean of the samples (0 for an empty signal).
    pub fn mean(&self) -> f64 {
        mean(&self.samples)
    }

    /// Population variance (1/N normalization).
    pub fn variance(&self) -> f64 {
        variance(&self.samples)
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    /// Multiply every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|s| s * gain).collect(),
            self.sample_rate,
        )
    }

    /// Concatenate signals sharing one sample rate.
    pub fn concat(parts: &[MonoSignal]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidSignal("nothing to concatenate".into()));
        };
        if parts.iter().any(|p| p.sample_rate != first.sample_rate) {
            return Err(Error::DimensionMismatch(
                "cannot concatenate signals with different sample rates".into(),
            ));
        }
        let samples = parts
            .iter()
            .flat_map(|p| p.samples.iter().copied())
            .collect();
        Self::new(samples, first.sample_rate)
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

pub(crate) fn variance(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Fixed-length, possibly overlapping windows over a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Vec<f64>>,
    pub frame_length: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Sample index of the first sample of frame `i`.
    pub fn start(&self, i: usize) -> usize {
        i * self.hop
    }

    /// Time of the centre of frame `i`, in seconds.
    pub fn center_time(&self, i: usize) -> f64 {
        (i * self.hop) as f64 / self.sample_rate as f64
            + self.frame_length as f64 / (2.0 * self.sample_rate as f64)
    }
}

/// Number of frames covering `n` samples: `ceil(max(0, n - len) / hop) + 1`, or 0 when `n == 0`.
pub fn frame_count(n: usize, frame_length: usize, hop: usize) -> usize {
    if n == 0 {
        0
    } else {
        n.saturating_sub(frame_length).div_ceil(hop) + 1
    }
}

/// Split raw samples into frames of `frame_length` with step `hop`, zero-padding the tail.
pub fn frame_samples(
    samples: &[f64],
    frame_length: usize,
    hop: usize,
    sample_rate: u32,
) -> Result<FrameSequence> {
    if frame_length == 0 || hop == 0 || hop > frame_length {
        return Err(Error::InvalidParameter(format!(
            "need 0 < hop <= frame length, got hop {hop}, frame {frame_length}"
        )));
    }
    let count = frame_count(samples.len(), frame_length, hop);
    let frames = (0..count)
        .map(|i| {
            let start = i * hop;
            let end = (start + frame_length).min(samples.len());
            let mut frame = samples[start..end].to_vec();
            frame.resize(frame_length, 0.0);
            frame
        })
        .collect();
    Ok(FrameSequence {
        frames,
        frame_length,
        hop,
        sample_rate,
    })
}

/// Frame a signal with durations given in milliseconds.
pub fn frame_signal(signal: &MonoSignal, frame_ms: f64, hop_ms: f64) -> Result<FrameSequence> {
    if !(frame_ms > 0.0 && hop_ms > 0.0) {
        return Err(Error::InvalidParameter(
            "frame and hop durations must be positive".into(),
        ));
    }
    if hop_ms > frame_ms {
        return Err(Error::InvalidParameter(format!(
            "hop ({hop_ms} ms) longer than frame ({frame_ms} ms)"
        )));
    }
    let rate = signal.sample_rate() as f64;
    let frame_length = (frame_ms * rate / 1000.0).round() as usize;
    let hop = ((hop_ms * rate / 1000.0).round() as usize).clamp(1, frame_length.max(1));
    frame_samples(signal.samples(), frame_length, hop, signal.sample_rate())
}

/// Symmetric Hann window, `w[k] = 0.5 - 0.5 cos(2πk/(n-1))`.
pub fn hann_window(n: usize) -> Result<Vec<f64>> {
    match n {
        0 => Err(Error::InvalidParameter("window length must be >= 1".into())),
        1 => Ok(vec![1.0]),
        _ => {
            let denom = (n - 1) as f64;
            let half = n / 2;
            let mut w = vec![0.0; n];
            for k in 0..n.div_ceil(2) {
                let v = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / denom).cos();
                w[k] = v;
                w[n - 1 - k] = v;
            }
            if n % 2 == 1 {
                w[half] = 1.0;
            }
            Ok(w)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_finite_and_zero_rate() {
        assert!(MonoSignal::new(vec![0.0, f64::NAN], 8000).is_err());
        assert!(MonoSignal::new(vec![0.0], 0).is_err());
        assert!(MonoSignal::new(vec![], 8000).unwrap().is_empty());
    }

    #[test]
    fn hann_closed_forms() {
        assert_eq!(hann_window(1).unwrap(), vec![1.0]);
        let w3 = hann_window(3).unwrap();
        assert_eq!(w3, vec![0.0, 1.0, 0.0]);
        let w5 = hann_window(5).unwrap();
        for (a, b) in w5.iter().zip([0.0, 0.5, 1.0, 0.5, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(hann_window(0).is_err());
    }

    #[test]
    fn hann_1024_peak_and_symmetry() {
        let w = hann_window(1024).unwrap();
        let max = w.iter().cloned().fold(f64::MIN, f64::max);
        assert!((max - 1.0).abs() < 1e-5);
        for k in 0..1024 {
            assert!((w[k] - w[1023 - k]).abs() < 1e-12);
        }
        // direct evaluation of the closed form
        for (k, v) in w.iter().enumerate() {
            let direct = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / 1023.0).cos();
            assert!((v - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn framing_small_cases() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let f = frame_samples(&x, 100, 100, 1000).unwrap();
        assert_eq!(f.len(), 1);

        let x: Vec<f64> = (1..=150).map(|i| i as f64).collect();
        let f = frame_samples(&x, 100, 50, 1000).unwrap();
        assert_eq!(f.len(), 2);
        // second frame covers samples 50..150 exactly, no padding needed
        assert_eq!(f.frames[1][99], 150.0);

        assert!(frame_samples(&x, 10, 11, 1000).is_err());
        assert!(frame_samples(&x, 10, 0, 1000).is_err());
        assert_eq!(frame_samples(&[], 10, 5, 1000).unwrap().len(), 0);
    }

    #[test]
    fn framing_40ms_at_44100_matches_enumeration() {
        let sig = MonoSignal::zeros(44100, 44100).unwrap();
        let f = frame_signal(&sig, 40.0, 10.0).unwrap();
        assert_eq!(f.frame_length, 1764);
        assert_eq!(f.hop, 441);
        // enumerate start positions until a frame covers the last sample
        let mut count = 0;
        let mut start = 0;
        loop {
            count += 1;
            if start + 1764 >= 44100 {
                break;
            }
            start += 441;
        }
        assert_eq!(f.len(), count);
        assert!(frame_signal(&sig, 10.0, 40.0).is_err());
        assert!(frame_signal(&sig, 0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn framing_covers_every_sample(n in 1usize..3000, len in 1usize..400, hop_frac in 0.01f64..1.0) {
            let hop = ((len as f64 * hop_frac).ceil() as usize).clamp(1, len);
            let x: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
            let f = frame_samples(&x, len, hop, 1000).unwrap();
            prop_assert_eq!(f.len(), frame_count(n, len, hop));
            let mut seen = vec![false; n];
            for (i, frame) in f.frames.iter().enumerate() {
                prop_assert_eq!(frame.len(), len);
                for (k, v) in frame.iter().enumerate() {
                    let idx = f.start(i) + k;
                    if idx < n {
                        prop_assert_eq!(*v, x[idx]);
                        seen[idx] = true;
                    } else {
                        prop_assert_eq!(*v, 0.0);
                    }
                }
            }
            prop_assert!(seen.iter().all(|s| *s));
        }

        #[test]
        fn hann_is_exactly_symmetric(n in 1usize..5000) {
            let w = hann_window(n).unwrap();
            for k in 0..n {
                prop_assert_eq!(w[k], w[n - 1 - k]);
            }
        }
    }
}
