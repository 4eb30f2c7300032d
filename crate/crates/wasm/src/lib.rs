//! Browser bindings for three interactive views: separating a simulated
//! scene, denoising a tone in noise, and specific loudness of test signals.
//! Each export returns a JSON string for the page script to plot.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use voxsep::enhance::{enhance, segmental_snr_db, EnhanceParams};
use voxsep::ica::{fastica, FastIcaParams};
use voxsep::psycho::{loudness, sharpness, CalibrationSpec, SpecificLoudness};
use voxsep::scene::{mix, synth, MixingMatrix, Scene};
use voxsep::{Error, MonoSignal, Result};
use wasm_bindgen::prelude::*;

const PLOT_POINTS: usize = 400;

/// Peak-preserving decimation to at most `PLOT_POINTS` (min, max) pairs.
fn envelope(s: &[f64]) -> Vec<[f64; 2]> {
    if s.is_empty() {
        return Vec::new();
    }
    let chunk = s.len().div_ceil(PLOT_POINTS);
    s.chunks(chunk)
        .map(|c| {
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            [lo, hi]
        })
        .collect()
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plot data serializes")
}

#[derive(Serialize)]
struct SeparationView {
    sample_rate: u32,
    window_s: f64,
    sources: Vec<Vec<f64>>,
    mixtures: Vec<Vec<f64>>,
    estimates: Vec<Vec<f64>>,
    correlation: Vec<f64>,
    si_sdr_db: Vec<f64>,
    converged: bool,
}

/// Mix the demo talkers, unmix them, and return a 50 ms excerpt of each stage.
pub fn separation_view(sources: usize, snr_db: Option<f64>, seed: u64) -> Result<String> {
    let rate = 8000;
    let truth = synth::demo_sources(sources, 3.0, rate)?;
    let scene = Scene::new(truth.clone(), MixingMatrix::demo(sources), snr_db, seed)?;
    let x = mix(&scene)?;
    let params = FastIcaParams {
        seed,
        ..Default::default()
    };
    let res = fastica(&x, &params, Some(&truth))?;
    let score = res.score.clone().expect("references given");
    let span = 1000..1400;
    let excerpt = |v: &[MonoSignal], norm: bool| -> Vec<Vec<f64>> {
        v.iter()
            .map(|s| {
                let peak = s.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let g = if norm && peak > 0.0 { 1.0 / peak } else { 1.0 };
                s.samples()[span.clone()].iter().map(|v| v * g).collect()
            })
            .collect()
    };
    let view = SeparationView {
        sample_rate: rate,
        window_s: span.len() as f64 / rate as f64,
        sources: excerpt(&truth, true),
        mixtures: excerpt(&x, true),
        estimates: excerpt(&res.sources, true),
        correlation: score.per_source_correlation,
        si_sdr_db: score.per_source_si_sdr_db,
        converged: res.all_converged(),
    };
    Ok(to_json(&view))
}

#[derive(Serialize)]
struct EnhancementView {
    sample_rate: u32,
    duration_s: f64,
    clean: Vec<[f64; 2]>,
    noisy: Vec<[f64; 2]>,
    enhanced: Vec<[f64; 2]>,
    pauses: Vec<bool>,
    pause_hop_s: f64,
    fallback: bool,
    seg_snr_before_db: f64,
    seg_snr_after_db: f64,
}

/// A 300 Hz tone between silent gaps, buried in white noise at `snr_db`, then denoised.
pub fn enhancement_view(snr_db: f64, alpha: f64, beta: f64, seed: u64) -> Result<String> {
    let rate = 16000;
    let gap = MonoSignal::zeros(rate as usize / 2, rate)?;
    let tone = synth::sine(300.0, 0.5, 2.0, rate)?;
    let clean = MonoSignal::concat(&[gap.clone(), tone, gap])?;
    let sigma = (0.125 / 10f64.powf(snr_db / 10.0)).sqrt();
    let noise = synth::white_noise(sigma, clean.duration_s(), rate, seed)?;
    let noisy: Vec<f64> = clean
        .samples()
        .iter()
        .zip(noise.samples())
        .map(|(a, b)| a + b)
        .collect();
    let noisy = MonoSignal::new(noisy, rate)?;
    let params = EnhanceParams {
        alpha,
        beta,
        ..Default::default()
    };
    let out = enhance(&noisy, &params)?;
    let view = EnhancementView {
        sample_rate: rate,
        duration_s: clean.duration_s(),
        clean: envelope(clean.samples()),
        noisy: envelope(noisy.samples()),
        enhanced: envelope(out.signal.samples()),
        pause_hop_s: out.mask.hop as f64 / rate as f64,
        pauses: out.mask.pauses.clone(),
        fallback: out.mask.fallback,
        seg_snr_before_db: segmental_snr_db(clean.samples(), noisy.samples(), 512)?,
        seg_snr_after_db: segmental_snr_db(clean.samples(), out.signal.samples(), 512)?,
    };
    Ok(to_json(&view))
}

/// White noise limited to `[lo, hi]` Hz by zeroing FFT bins, at `rms`.
fn band_noise(lo: f64, hi: f64, rms: f64, rate: u32, seed: u64) -> Result<MonoSignal> {
    let noise = synth::white_noise(1.0, 1.0, rate, seed)?;
    let n = noise.len();
    let mut buf: Vec<Complex64> = noise
        .samples()
        .iter()
        .map(|v| Complex64::new(*v, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 * rate as f64 / n as f64;
        if f < lo || f > hi {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let y = MonoSignal::new(buf.iter().map(|c| c.re).collect(), rate)?;
    let r = y.rms();
    if r.is_nan() || r <= 0.0 {
        return Err(Error::InvalidParameter("empty band".into()));
    }
    y.scaled(rms / r)
}

#[derive(Serialize)]
struct LoudnessView {
    z_bark: Vec<f64>,
    specific_sone_per_bark: Vec<f64>,
    total_sone: f64,
    phon: f64,
    sharpness_acum: Option<f64>,
}

/// Specific loudness of a test signal at `spl` dB SPL.
///
/// `kind` is `tone` (1 kHz sine), `band` (1 kHz critical-band noise),
/// `lowpass` (noise below 1 kHz) or `highpass` (noise above 4 kHz).
pub fn loudness_view(kind: &str, spl: f64) -> Result<String> {
    let rate = 44100;
    let cal = CalibrationSpec::default();
    let rms = cal.sine_amplitude(spl) / 2f64.sqrt();
    let signal = match kind {
        "tone" => synth::sine(1000.0, rms * 2f64.sqrt(), 1.0, rate)?,
        "band" => band_noise(920.0, 1080.0, rms, rate, 1)?,
        "lowpass" => band_noise(20.0, 1000.0, rms, rate, 2)?,
        "highpass" => band_noise(4000.0, 16000.0, rms, rate, 3)?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown signal '{other}' (tone, band, lowpass, highpass)"
            )))
        }
    };
    let a = loudness(&signal, &cal)?;
    let n = &a.long_term;
    let view = LoudnessView {
        z_bark: SpecificLoudness::grid(),
        specific_sone_per_bark: n.values.clone(),
        total_sone: n.total_sone,
        phon: n.phon,
        sharpness_acum: sharpness(n).ok(),
    };
    Ok(to_json(&view))
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn separation_demo(
    sources: usize,
    snr_db: f64,
    seed: u32,
) -> std::result::Result<String, JsError> {
    let snr = snr_db.is_finite().then_some(snr_db);
    js(separation_view(sources, snr, seed as u64))
}

#[wasm_bindgen]
pub fn enhancement_demo(
    snr_db: f64,
    alpha: f64,
    beta: f64,
    seed: u32,
) -> std::result::Result<String, JsError> {
    js(enhancement_view(snr_db, alpha, beta, seed as u64))
}

#[wasm_bindgen]
pub fn loudness_demo(kind: &str, spl: f64) -> std::result::Result<String, JsError> {
    js(loudness_view(kind, spl))
}
