use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{hann_window, MonoSignal};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
}

/// Short-time spectra of a signal, one-sided (`fft_size/2 + 1` bins per frame).
///
/// Frame `m` is centred on sample `m * hop`; the signal is zero-padded by
/// `fft_size/2` on both sides so that every input sample is covered.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    pub frames: Vec<Vec<Complex64>>,
    pub fft_size: usize,
    pub hop: usize,
    pub sample_rate: u32,
    pub window: WindowKind,
    /// Length of the analysed signal in samples.
    pub signal_len: usize,
}

impl Spectrogram {
    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn bin_frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.sample_rate as f64 / self.fft_size as f64
    }

    /// Centre time of frame `m`, in seconds.
    pub fn frame_time(&self, m: usize) -> f64 {
        (m * self.hop) as f64 / self.sample_rate as f64
    }

    pub fn magnitudes(&self, m: usize) -> Vec<f64> {
        self.frames[m].iter().map(|c| c.norm()).collect()
    }
}

/// Forward real FFT of a fixed size, returning the one-sided spectrum.
pub(crate) struct RealFft {
    fft: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n: usize,
}

impl RealFft {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            fft: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            n,
        }
    }

    pub(crate) fn forward(&self, frame: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = frame.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        buf.resize(self.n, Complex64::new(0.0, 0.0));
        self.fft.process(&mut buf);
        buf.truncate(self.n / 2 + 1);
        buf
    }

    /// Inverse of [`RealFft::forward`], normalized so that `inverse(forward(x)) == x`.
    pub(crate) fn inverse(&self, half: &[Complex64]) -> Vec<f64> {
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[..half.len()].copy_from_slice(half);
        for k in 1..n.div_ceil(2) {
            buf[n - k] = half[k].conj();
        }
        self.inverse.process(&mut buf);
        buf.iter().map(|c| c.re / n as f64).collect()
    }
}

fn check_settings(fft_size: usize, hop: usize) -> Result<()> {
    if fft_size < 64 || !fft_size.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "fft size must be a power of two >= 64, got {fft_size}"
        )));
    }
    if hop != fft_size / 2 {
        return Err(Error::InvalidParameter(format!(
            "hop must be fft_size/2 = {}, got {hop}",
            fft_size / 2
        )));
    }
    Ok(())
}

/// Hann-windowed STFT with 50% overlap.
pub fn stft(
    signal: &MonoSignal,
    fft_size: usize,
    hop: usize,
    window: WindowKind,
) -> Result<Spectrogram> {
    check_settings(fft_size, hop)?;
    let WindowKind::Hann = window;
    let w = hann_window(fft_size)?;
    let x = signal.samples();
    let n = x.len();
    let count = if n == 0 { 0 } else { n.div_ceil(hop) + 1 };
    let half = fft_size / 2;
    let rfft = RealFft::new(fft_size);
    let mut frame = vec![0.0; fft_size];
    let frames = (0..count)
        .map(|m| {
            let origin = (m * hop) as isize - half as isize;
            for (k, slot) in frame.iter_mut().enumerate() {
                let idx = origin + k as isize;
                *slot = if idx >= 0 && (idx as usize) < n {
                    x[idx as usize] * w[k]
                } else {
                    0.0
                };
            }
            rfft.forward(&frame)
        })
        .collect();
    Ok(Spectrogram {
        frames,
        fft_size,
        hop,
        sample_rate: signal.sample_rate(),
        window,
        signal_len: n,
    })
}

/// Overlap-add resynthesis normalized by the summed analysis windows.
pub fn istft(spec: &Spectrogram) -> Result<MonoSignal> {
    check_settings(spec.fft_size, spec.hop)?;
    if let Some(bad) = spec.frames.iter().position(|f| f.len() != spec.bins()) {
        return Err(Error::DimensionMismatch(format!(
            "frame {bad} has {} bins, expected {}",
            spec.frames[bad].len(),
            spec.bins()
        )));
    }
    let w = hann_window(spec.fft_size)?;
    let n = spec.signal_len;
    let half = spec.fft_size / 2;
    let rfft = RealFft::new(spec.fft_size);
    let mut acc = vec![0.0; n];
    let mut wsum = vec![0.0; n];
    for (m, frame) in spec.frames.iter().enumerate() {
        let time = rfft.inverse(frame);
        let origin = (m * spec.hop) as isize - half as isize;
        for (k, v) in time.iter().enumerate() {
            let idx = origin + k as isize;
            if idx >= 0 && (idx as usize) < n {
                acc[idx as usize] += v;
                wsum[idx as usize] += w[k];
            }
        }
    }
    let out = acc
        .iter()
        .zip(&wsum)
        .map(|(a, s)| if *s > 1e-8 { a / s } else { 0.0 })
        .collect();
    MonoSignal::new(out, spec.sample_rate)
}
