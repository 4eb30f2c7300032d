//! Deterministic test and demonstration signals.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::signal::MonoSignal;

fn len_for(duration_s: f64, rate: u32) -> usize {
    (duration_s * rate as f64).round().max(0.0) as usize
}

/// Amplitude-modulated sawtooth: a crude voiced-speech stand-in.
///
/// `peak * (1 - depth/2 + depth/2 * sin(2π am_rate t + phase)) * saw(f0 t)`,
/// where `saw` is band-limited to the harmonics below Nyquist (so the sampled
/// waveform stays harmonic) and scaled to unit peak.
pub fn am_sawtooth(
    f0: f64,
    am_rate: f64,
    depth: f64,
    phase: f64,
    peak: f64,
    duration_s: f64,
    rate: u32,
) -> Result<MonoSignal> {
    let n = len_for(duration_s, rate);
    let fs = rate as f64;
    let harmonics = ((fs / 2.0) / f0).floor().max(1.0) as usize;
    let saw: Vec<f64> = (0..n)
        .map(|i| {
            // Σ sin(hφ)/h via the Chebyshev recurrence sin((h+1)φ) = 2cosφ sin(hφ) - sin((h-1)φ)
            let phi = 2.0 * PI * (f0 * i as f64 / fs).fract();
            let c2 = 2.0 * phi.cos();
            let (mut prev, mut cur) = (0.0, phi.sin());
            let mut sum = 0.0;
            for h in 1..=harmonics {
                sum += cur / h as f64;
                let next = c2 * cur - prev;
                prev = cur;
                cur = next;
            }
            -sum
        })
        .collect();
    let top = saw.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let norm = if top > 0.0 { 1.0 / top } else { 0.0 };
    let samples = saw
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let t = i as f64 / fs;
            let env = 1.0 - depth / 2.0 + depth / 2.0 * (2.0 * PI * am_rate * t + phase).sin();
            peak * env * s * norm
        })
        .collect();
    MonoSignal::new(samples, rate)
}

const DEMO_F0: [f64; 5] = [110.0, 173.0, 241.0, 137.0, 203.0];
const DEMO_AM: [f64; 5] = [2.3, 3.7, 5.1, 1.7, 4.3];

/// `count` (1 to 5) distinct AM sawtooth talkers with peak amplitude 0.3.
pub fn demo_sources(count: usize, duration_s: f64, rate: u32) -> Result<Vec<MonoSignal>> {
    if count == 0 || count > DEMO_F0.len() {
        return Err(Error::InvalidParameter(format!(
            "demo has 1 to {} talkers, got {count}",
            DEMO_F0.len()
        )));
    }
    (0..count)
        .map(|k| am_sawtooth(DEMO_F0[k], DEMO_AM[k], 0.8, k as f64, 0.3, duration_s, rate))
        .collect()
}

pub fn sine(freq: f64, amplitude: f64, duration_s: f64, rate: u32) -> Result<MonoSignal> {
    let n = len_for(duration_s, rate);
    let fs = rate as f64;
    MonoSignal::new(
        (0..n)
            .map(|i| amplitude * (2.0 * PI * freq * i as f64 / fs).sin())
            .collect(),
        rate,
    )
}

/// Linear chirp from `f_start` to `f_end` over the whole duration.
pub fn linear_sweep(
    f_start: f64,
    f_end: f64,
    amplitude: f64,
    duration_s: f64,
    rate: u32,
) -> Result<MonoSignal> {
    let n = len_for(duration_s, rate);
    let fs = rate as f64;
    let k = (f_end - f_start) / duration_s;
    MonoSignal::new(
        (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                amplitude * (2.0 * PI * (f_start * t + 0.5 * k * t * t)).sin()
            })
            .collect(),
        rate,
    )
}

/// Instantaneous frequency of [`linear_sweep`] at time `t`.
pub fn linear_sweep_frequency(f_start: f64, f_end: f64, duration_s: f64, t: f64) -> f64 {
    f_start + (f_end - f_start) * t / duration_s
}

/// Train of smooth bipolar pulses (Gaussian derivatives, width `sigma_s`)
/// whose positive-going zero crossings sit exactly at `times`.
pub fn pulse_train(
    times: &[f64],
    sigma_s: f64,
    amplitude: f64,
    duration_s: f64,
    rate: u32,
) -> Result<MonoSignal> {
    let n = len_for(duration_s, rate);
    let fs = rate as f64;
    let mut x = vec![0.0; n];
    let reach = (8.0 * sigma_s * fs).ceil() as isize;
    let norm = amplitude * 0.5f64.exp();
    for &tc in times {
        let centre = (tc * fs).round() as isize;
        for i in (centre - reach).max(0)..(centre + reach).min(n as isize) {
            let u = (i as f64 / fs - tc) / sigma_s;
            x[i as usize] += norm * u * (-0.5 * u * u).exp();
        }
    }
    MonoSignal::new(x, rate)
}

/// Pulse times starting at `start` with periods cycling through `periods`.
pub fn pulse_times(start: f64, periods: &[f64], duration_s: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut t = start;
    let mut k = 0;
    while t < duration_s && !periods.is_empty() {
        times.push(t);
        t += periods[k % periods.len()];
        k += 1;
    }
    times
}

pub fn white_noise(sigma: f64, duration_s: f64, rate: u32, seed: u64) -> Result<MonoSignal> {
    let n = len_for(duration_s, rate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MonoSignal::new(
        (0..n)
            .map(|_| {
                let v: f64 = StandardNormal.sample(&mut rng);
                sigma * v
            })
            .collect(),
        rate,
    )
}

/// Zero-mean uniform noise with unit variance.
pub fn uniform_noise(duration_s: f64, rate: u32, seed: u64) -> Result<MonoSignal> {
    let n = len_for(duration_s, rate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_width = 3f64.sqrt();
    let dist = Uniform::new(-half_width, half_width).expect("valid range");
    MonoSignal::new((0..n).map(|_| dist.sample(&mut rng)).collect(), rate)
}

/// Zero-mean Laplacian noise with unit variance.
pub fn laplace_noise(duration_s: f64, rate: u32, seed: u64) -> Result<MonoSignal> {
    let n = len_for(duration_s, rate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new(-0.5, 0.5).expect("valid range");
    let b = 1.0 / 2f64.sqrt();
    MonoSignal::new(
        (0..n)
            .map(|_| {
                let u: f64 = dist.sample(&mut rng);
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            })
            .collect(),
        rate,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_sources_are_distinct_and_bounded() {
        let src = demo_sources(3, 1.0, 8000).unwrap();
        assert_eq!(src.len(), 3);
        for s in &src {
            assert_eq!(s.len(), 8000);
            assert!(s.samples().iter().all(|v| v.abs() <= 0.3 + 1e-12));
        }
        let r = crate::scene::pearson(src[0].samples(), src[1].samples()).unwrap();
        assert!(r.abs() < 0.1);
        assert!(demo_sources(0, 1.0, 8000).is_err());
        assert!(demo_sources(6, 1.0, 8000).is_err());
    }

    #[test]
    fn pulse_crossings_sit_on_the_requested_times() {
        let times = [0.01, 0.02];
        let x = pulse_train(&times, 0.0005, 1.0, 0.03, 44100).unwrap();
        let i = (0.01f64 * 44100.0).round() as usize;
        assert!(x.samples()[i - 2] < 0.0 && x.samples()[i + 2] > 0.0);
        let peak = x.samples().iter().cloned().fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-3);
    }

    #[test]
    fn noise_moments() {
        let u = uniform_noise(2.0, 50000, 1).unwrap();
        assert!((u.variance() - 1.0).abs() < 0.02);
        let l = laplace_noise(2.0, 50000, 1).unwrap();
        assert!((l.variance() - 1.0).abs() < 0.05);
    }
}
