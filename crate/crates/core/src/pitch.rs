//! Frame-wise F0 by normalized autocorrelation.
//!
//! Each frame is mean-removed and Hann-windowed. Its autocorrelation is
//! divided by the window's own autocorrelation,
//!
//! ```text
//! r(τ) = (r_x(τ) / r_x(0)) / (r_w(τ) / r_w(0))
//! ```
//!
//! which undoes the taper and lets a periodic frame reach `r ≈ 1` at its
//! period. The best local maximum in the lag band is refined by a parabola
//! and `f0 = rate / lag`.

use std::io::Write;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::stft::RealFft;
use crate::signal::{frame_signal, hann_window, MonoSignal};

/// Lags whose window autocorrelation falls below this fraction of `r_w(0)` are ignored.
const MIN_WINDOW_CORRELATION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PitchParams {
    pub fmin: f64,
    pub fmax: f64,
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub voicing_threshold: f64,
    /// Parabolic lag refinement; `false` keeps integer lags.
    pub interpolate: bool,
    /// Per-octave preference for shorter lags when ranking candidate peaks.
    pub octave_cost: f64,
    /// Frames whose peak amplitude is below this fraction of the signal's
    /// peak amplitude are unvoiced.
    pub silence_threshold: f64,
}

impl Default for PitchParams {
    fn default() -> Self {
        Self {
            fmin: 60.0,
            fmax: 400.0,
            frame_ms: 40.0,
            hop_ms: 10.0,
            voicing_threshold: 0.45,
            interpolate: true,
            octave_cost: 0.01,
            silence_threshold: 0.03,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchFrame {
    /// Frame centre in seconds.
    pub time_s: f64,
    pub f0_hz: Option<f64>,
    pub voiced: bool,
    /// Normalized autocorrelation at the chosen lag, clipped to [0, 1].
    pub peak_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchContour {
    pub frames: Vec<PitchFrame>,
    pub fmin: f64,
    pub fmax: f64,
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub sample_rate: u32,
}

impl PitchContour {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn voiced_f0(&self) -> Vec<f64> {
        self.frames.iter().filter_map(|f| f.f0_hz).collect()
    }

    pub fn voiced_fraction(&self) -> f64 {
        if self.frames.is_empty() {
            return 0.0;
        }
        self.frames.iter().filter(|f| f.voiced).count() as f64 / self.frames.len() as f64
    }

    /// Contour from explicit per-frame values (`None` = unvoiced).
    pub fn from_values(
        f0: &[Option<f64>],
        hop_ms: f64,
        fmin: f64,
        fmax: f64,
        sample_rate: u32,
    ) -> Self {
        let frames = f0
            .iter()
            .enumerate()
            .map(|(i, f)| PitchFrame {
                time_s: i as f64 * hop_ms / 1000.0,
                f0_hz: *f,
                voiced: f.is_some(),
                peak_r: if f.is_some() { 1.0 } else { 0.0 },
            })
            .collect();
        Self {
            frames,
            fmin,
            fmax,
            frame_ms: hop_ms,
            hop_ms,
            sample_rate,
        }
    }

    /// Write `time_s,f0_hz,voiced,peak_r`; unvoiced frames leave `f0_hz` empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        w.write_record(["time_s", "f0_hz", "voiced", "peak_r"])
            .map_err(io)?;
        for f in &self.frames {
            w.write_record([
                format!("{:.6}", f.time_s),
                f.f0_hz.map(|v| format!("{v:.6}")).unwrap_or_default(),
                u8::from(f.voiced).to_string(),
                format!("{:.6}", f.peak_r),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        Ok(())
    }
}

/// Candidates refined by band-limited interpolation in each frame.
const REFINED_CANDIDATES: usize = 4;

struct Autocorrelator {
    fft: RealFft,
    nfft: usize,
    window: Vec<f64>,
    /// One-sided power spectrum of the window.
    window_power: Vec<f64>,
    /// `r_w(τ) / r_w(0)` at integer lags.
    window_r: Vec<f64>,
}

impl Autocorrelator {
    fn new(len: usize) -> Result<Self> {
        let nfft = (2 * len).next_power_of_two();
        let fft = RealFft::new(nfft);
        let window = hann_window(len)?;
        let window_power = power_spectrum(&fft, &window);
        let rw = autocorr_from_power(&fft, &window_power, len);
        let window_r = rw.iter().map(|v| v / rw[0]).collect();
        Ok(Self {
            fft,
            nfft,
            window,
            window_power,
            window_r,
        })
    }
}

fn power_spectrum(fft: &RealFft, x: &[f64]) -> Vec<f64> {
    fft.forward(x).iter().map(|c| c.norm_sqr()).collect()
}

fn autocorr_from_power(fft: &RealFft, power: &[f64], len: usize) -> Vec<f64> {
    let half: Vec<Complex64> = power.iter().map(|p| Complex64::new(*p, 0.0)).collect();
    let mut r = fft.inverse(&half);
    r.truncate(len);
    r
}

/// Autocorrelation and its slope at a fractional lag, from the trigonometric
/// interpolant of the (zero-padded, hence linear) autocorrelation sequence.
fn autocorr_at(power: &[f64], nfft: usize, tau: f64) -> (f64, f64) {
    let w = 2.0 * std::f64::consts::PI / nfft as f64;
    let theta = w * tau;
    let step = Complex64::new(theta.cos(), theta.sin());
    let mut rot = step;
    let last = power.len() - 1;
    let (mut value, mut slope) = (power[0], 0.0);
    for (k, p) in power[1..last].iter().enumerate() {
        value += 2.0 * p * rot.re;
        slope -= 2.0 * p * w * (k + 1) as f64 * rot.im;
        rot *= step;
    }
    value += power[last] * rot.re;
    slope -= power[last] * w * last as f64 * rot.im;
    (value / nfft as f64, slope / nfft as f64)
}

/// Lag of the maximum of `r_x / r_w` in `[t - 1, t + 1]`, by bisection on the
/// sign of its derivative. `None` when the derivative does not change sign.
fn refine_lag(power: &[f64], window_power: &[f64], nfft: usize, t: f64) -> Option<f64> {
    // sign of d/dτ (r_x / r_w), i.e. of r_x' r_w - r_x r_w'
    let rising = |tau: f64| {
        let (x, dx) = autocorr_at(power, nfft, tau);
        let (w, dw) = autocorr_at(window_power, nfft, tau);
        dx * w - x * dw > 0.0
    };
    let (mut lo, mut hi) = (t - 1.0, t + 1.0);
    if !rising(lo) || rising(hi) {
        return None;
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if rising(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn analyse_frame(
    frame: &[f64],
    ac: &Autocorrelator,
    rate: f64,
    p: &PitchParams,
) -> (Option<f64>, f64) {
    let mean = frame.iter().sum::<f64>() / frame.len() as f64;
    let x: Vec<f64> = frame
        .iter()
        .zip(&ac.window)
        .map(|(v, w)| (v - mean) * w)
        .collect();
    let energy: f64 = x.iter().map(|v| v * v).sum();
    if energy <= 0.0 {
        return (None, 0.0);
    }
    let power = power_spectrum(&ac.fft, &x);
    let rx = autocorr_from_power(&ac.fft, &power, frame.len());
    let len = frame.len();
    let r = |tau: usize| -> Option<f64> {
        let rw = ac.window_r[tau];
        (rw >= MIN_WINDOW_CORRELATION).then(|| rx[tau] / rx[0] / rw)
    };
    // amplitude drift inside a frame can push r above 1; such peaks are
    // reflected to 1/r so they cannot outrank a clean peak at a shorter lag
    let reflect = |peak: f64| if peak > 1.0 { 1.0 / peak } else { peak };
    let strength =
        |peak: f64, lag: f64| reflect(peak) - p.octave_cost * (p.fmin * lag / rate).log2();
    let lo = ((rate / p.fmax).floor() as usize).max(2);
    let hi = ((rate / p.fmin).ceil() as usize).min(len - 2);
    // (strength, r, lag, integer lag)
    let mut candidates: Vec<(f64, f64, f64, usize)> = Vec::new();
    let mut max_r = 0.0f64;
    for tau in lo..=hi {
        let (Some(a), Some(b), Some(c)) = (r(tau - 1), r(tau), r(tau + 1)) else {
            continue;
        };
        max_r = max_r.max(b);
        if !(b >= a && b > c) {
            continue;
        }
        let (lag, peak) = if p.interpolate {
            let denom = a - 2.0 * b + c;
            if denom < 0.0 {
                let d = 0.5 * (a - c) / denom;
                (tau as f64 + d, b - 0.25 * (a - c) * d)
            } else {
                (tau as f64, b)
            }
        } else {
            (tau as f64, b)
        };
        candidates.push((strength(peak, lag), peak, lag, tau));
    }
    candidates.sort_by(|u, v| v.0.total_cmp(&u.0));
    if p.interpolate {
        // parabolas underestimate narrow peaks; re-evaluate the leaders exactly
        let rx0 = autocorr_at(&power, ac.nfft, 0.0).0;
        let rw0 = autocorr_at(&ac.window_power, ac.nfft, 0.0).0;
        for cand in candidates.iter_mut().take(REFINED_CANDIDATES) {
            let Some(lag) = refine_lag(&power, &ac.window_power, ac.nfft, cand.3 as f64) else {
                continue;
            };
            let rw = autocorr_at(&ac.window_power, ac.nfft, lag).0 / rw0;
            if rw >= MIN_WINDOW_CORRELATION {
                let peak = autocorr_at(&power, ac.nfft, lag).0 / rx0 / rw;
                *cand = (strength(peak, lag), peak, lag, cand.3);
            }
        }
        candidates.sort_by(|u, v| v.0.total_cmp(&u.0));
    }
    let best = candidates
        .into_iter()
        .find(|c| (p.fmin..=p.fmax).contains(&(rate / c.2)));
    match best {
        Some((_, peak, lag, _)) if reflect(peak) >= p.voicing_threshold => {
            (Some(rate / lag), reflect(peak).clamp(0.0, 1.0))
        }
        Some((_, peak, _, _)) => (None, reflect(peak).clamp(0.0, 1.0)),
        None => (None, max_r.clamp(0.0, 1.0)),
    }
}

/// Largest absolute deviation from the mean.
fn peak_deviation(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m).abs()).fold(0.0, f64::max)
}

/// F0 contour of `signal`, one frame every `hop_ms`.
pub fn estimate_f0_contour(signal: &MonoSignal, params: &PitchParams) -> Result<PitchContour> {
    let p = params;
    if signal.is_empty() {
        return Err(Error::InvalidSignal("empty signal".into()));
    }
    let rate = signal.sample_rate() as f64;
    if !(p.fmin > 0.0 && p.fmin < p.fmax && p.fmax < rate / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < fmin < fmax < rate/2, got {}..{} Hz at {rate} Hz",
            p.fmin, p.fmax
        )));
    }
    if !(40.0..=80.0).contains(&p.frame_ms) {
        return Err(Error::InvalidParameter(format!(
            "frame length must be 40-80 ms, got {}",
            p.frame_ms
        )));
    }
    if p.frame_ms / 1000.0 < 2.0 / p.fmin {
        return Err(Error::InvalidParameter(format!(
            "{} ms frame holds fewer than two periods at {} Hz",
            p.frame_ms, p.fmin
        )));
    }
    if !(0.0..=1.0).contains(&p.voicing_threshold)
        || !(0.0..1.0).contains(&p.silence_threshold)
        || !(p.octave_cost >= 0.0)
    {
        return Err(Error::InvalidParameter(
            "voicing and silence thresholds must be in [0, 1), octave cost non-negative".into(),
        ));
    }
    let frames = frame_signal(signal, p.frame_ms, p.hop_ms)?;
    let ac = Autocorrelator::new(frames.frame_length)?;
    let global_peak = peak_deviation(signal.samples());
    let out = frames
        .frames
        .iter()
        .enumerate()
        .map(|(i, frame)| {
            let (mut f0, peak_r) = analyse_frame(frame, &ac, rate, p);
            if peak_deviation(frame) < p.silence_threshold * global_peak {
                f0 = None;
            }
            PitchFrame {
                time_s: frames.center_time(i),
                f0_hz: f0,
                voiced: f0.is_some(),
                peak_r,
            }
        })
        .collect();
    Ok(PitchContour {
        frames: out,
        fmin: p.fmin,
        fmax: p.fmax,
        frame_ms: p.frame_ms,
        hop_ms: p.hop_ms,
        sample_rate: signal.sample_rate(),
    })
}
