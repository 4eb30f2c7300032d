//! Jitter and shimmer from cycle-level period and amplitude contours.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pitch::PitchContour;
use crate::signal::MonoSignal;

/// Smallest run (in cycles) kept by [`extract_cycles`].
pub const MIN_RUN_CYCLES: usize = 3;

/// Periods and peak amplitudes of successive glottal cycles.
///
/// Cycles come in runs (one per voiced stretch); `run_starts` holds the index
/// of the first cycle of each run and no feature pairs cycles across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSequence {
    pub periods: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub run_starts: Vec<usize>,
}

impl CycleSequence {
    pub fn new(periods: Vec<f64>, amplitudes: Vec<f64>, run_starts: Vec<usize>) -> Result<Self> {
        if periods.len() != amplitudes.len() {
            return Err(Error::LengthMismatch {
                left: periods.len(),
                right: amplitudes.len(),
            });
        }
        if periods.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidParameter("periods must be positive".into()));
        }
        if amplitudes.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParameter(
                "amplitudes must be non-negative".into(),
            ));
        }
        let ordered = run_starts.windows(2).all(|w| w[0] < w[1]);
        let anchored = run_starts.first() == Some(&0) || periods.is_empty();
        if !ordered
            || !anchored
            || run_starts
                .last()
                .is_some_and(|&s| s >= periods.len().max(1))
        {
            return Err(Error::InvalidParameter(
                "run starts must begin at 0 and increase within the sequence".into(),
            ));
        }
        Ok(Self {
            periods,
            amplitudes,
            run_starts,
        })
    }

    /// A single run.
    pub fn contiguous(periods: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self> {
        Self::new(periods, amplitudes, vec![0])
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    /// Index ranges of the runs.
    pub fn runs(&self) -> Vec<std::ops::Range<usize>> {
        run_ranges(&self.run_starts, self.len())
    }
}

fn run_ranges(starts: &[usize], n: usize) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::with_capacity(starts.len());
    for (k, &s) in starts.iter().enumerate() {
        let e = starts.get(k + 1).copied().unwrap_or(n);
        out.push(s..e);
    }
    out
}

/// Lagrange polynomial through `(xs[j], ys[j])` evaluated at `t`.
fn lagrange(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let mut sum = 0.0;
    for (j, (&xj, &yj)) in xs.iter().zip(ys).enumerate() {
        let mut term = yj;
        for (m, &xm) in xs.iter().enumerate() {
            if m != j {
                term *= (t - xm) / (xj - xm);
            }
        }
        sum += term;
    }
    sum
}

/// Sub-sample position of the positive-going crossing between `i` and `i + 1`.
fn refine_crossing(x: &[f64], i: usize) -> f64 {
    if i < 2 || i + 3 >= x.len() {
        let (a, b) = (x[i], x[i + 1]);
        return i as f64 + if b == a { 0.0 } else { -a / (b - a) };
    }
    let xs: Vec<f64> = (0..6).map(|k| k as f64 - 2.0).collect();
    let ys = &x[i - 2..i + 4];
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if lagrange(&xs, ys, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    i as f64 + 0.5 * (lo + hi)
}

/// Largest |x| within `[start, end]` (sample positions), refined between samples.
fn refine_peak(x: &[f64], start: f64, end: f64) -> f64 {
    let lo = start.ceil().max(0.0) as usize;
    let hi = (end.floor() as usize).min(x.len() - 1);
    if lo > hi {
        return x[start.round().clamp(0.0, (x.len() - 1) as f64) as usize].abs();
    }
    let i = (lo..=hi)
        .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()).then(b.cmp(&a)))
        .unwrap();
    let peak = x[i].abs();
    if i < 3 || i + 3 >= x.len() {
        return peak;
    }
    let xs: Vec<f64> = (0..7).map(|k| k as f64 - 3.0).collect();
    let ys = &x[i - 3..i + 4];
    let f = |t: f64| lagrange(&xs, ys, t).abs();
    // golden-section search for the maximum on [-1, 1]
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (-1.0, 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-9 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    f(0.5 * (a + b)).max(peak)
}

fn crossings(x: &[f64]) -> Vec<f64> {
    (0..x.len().saturating_sub(1))
        .filter(|&i| x[i] < 0.0 && x[i + 1] >= 0.0)
        .map(|i| refine_crossing(x, i))
        .collect()
}

/// F0 at `t` by linear interpolation between voiced frame centres.
fn f0_at(points: &[(f64, f64)], t: f64) -> f64 {
    match points.iter().position(|p| p.0 >= t) {
        None => points[points.len() - 1].1,
        Some(0) => points[0].1,
        Some(k) => {
            let (t0, f0) = points[k - 1];
            let (t1, f1) = points[k];
            f0 + (f1 - f0) * (t - t0) / (t1 - t0)
        }
    }
}

/// Cycle boundaries at positive-going zero crossings, anchored to the F0 contour.
///
/// Inside each voiced run the next boundary is the crossing nearest to one
/// local period after the current one, searched within ±30% of a period.
pub fn extract_cycles(signal: &MonoSignal, contour: &PitchContour) -> Result<CycleSequence> {
    if contour.sample_rate != signal.sample_rate() {
        return Err(Error::DimensionMismatch(format!(
            "contour at {} Hz, signal at {} Hz",
            contour.sample_rate,
            signal.sample_rate()
        )));
    }
    let rate = signal.sample_rate() as f64;
    let x = signal.samples();
    let zc = crossings(x);
    let half_hop = contour.hop_ms / 2000.0;

    let mut periods = Vec::new();
    let mut amplitudes = Vec::new();
    let mut run_starts = Vec::new();
    let mut push_run = |bounds: &[f64], periods: &mut Vec<f64>, amplitudes: &mut Vec<f64>| {
        if bounds.len() > MIN_RUN_CYCLES {
            run_starts.push(periods.len());
            for w in bounds.windows(2) {
                periods.push((w[1] - w[0]) / rate);
                amplitudes.push(refine_peak(x, w[0], w[1]));
            }
        }
    };

    let frames = &contour.frames;
    let mut i = 0;
    while i < frames.len() {
        if !frames[i].voiced {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < frames.len() && frames[j + 1].voiced {
            j += 1;
        }
        let points: Vec<(f64, f64)> = frames[i..=j]
            .iter()
            .filter_map(|f| f.f0_hz.map(|f0| (f.time_s, f0)))
            .collect();
        let start = (frames[i].time_s - half_hop) * rate;
        let end = ((frames[j].time_s + half_hop) * rate).min(x.len() as f64 - 1.0);
        i = j + 1;

        let mut k = zc.partition_point(|&c| c < start);
        let mut bounds: Vec<f64> = Vec::new();
        while k < zc.len() && zc[k] <= end {
            let cur = zc[k];
            if bounds.is_empty() {
                bounds.push(cur);
            }
            let period = rate / f0_at(&points, cur / rate);
            let expected = cur + period;
            let window = 0.3 * period;
            let lo = zc.partition_point(|&c| c < expected - window);
            let hi = zc.partition_point(|&c| c <= expected + window);
            let next = (lo.max(k + 1)..hi).min_by(|&a, &b| {
                (zc[a] - expected)
                    .abs()
                    .total_cmp(&(zc[b] - expected).abs())
            });
            match next {
                Some(n) if zc[n] <= end => {
                    bounds.push(zc[n]);
                    k = n;
                }
                Some(_) => break,
                None => {
                    push_run(&bounds, &mut periods, &mut amplitudes);
                    bounds.clear();
                    k = zc.partition_point(|&c| c <= expected + window).max(k + 1);
                }
            }
        }
        push_run(&bounds, &mut periods, &mut amplitudes);
    }
    if periods.is_empty() {
        return Err(Error::NoVoicedFrames);
    }
    CycleSequence::new(periods, amplitudes, run_starts)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn nonzero_mean(v: &[f64]) -> Result<f64> {
    let m = mean(v);
    if m == 0.0 {
        return Err(Error::ZeroMean);
    }
    Ok(m)
}

/// Mean absolute difference of successive values, skipping pairs across runs.
pub fn mad_successive_runs(values: &[f64], run_starts: &[usize]) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in run_ranges(run_starts, values.len()) {
        for i in r.start + 1..r.end {
            sum += (values[i] - values[i - 1]).abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InsufficientData {
            needed: 2,
            have: values.len(),
        });
    }
    Ok(sum / count as f64)
}

pub fn mad_successive(values: &[f64]) -> Result<f64> {
    mad_successive_runs(values, &[0])
}

/// [`mad_successive`] relative to the mean, in percent.
pub fn mad_successive_pct(values: &[f64]) -> Result<f64> {
    let mad = mad_successive(values)?;
    Ok(mad / nonzero_mean(values)? * 100.0)
}

/// Perturbation quotient: mean deviation of each value from its centred
/// `k`-point average, over the contour mean, in percent.
pub fn pq_schoentgen_runs(values: &[f64], k: usize, run_starts: &[usize]) -> Result<f64> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "K must be odd and >= 3, got {k}"
        )));
    }
    let half = (k - 1) / 2;
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in run_ranges(run_starts, values.len()) {
        if r.len() < k {
            continue;
        }
        for i in r.start..=r.end - k {
            // |c - mean(window)| written as a mean of differences so constant input gives exactly 0
            let c = values[i + half];
            let dev = values[i..i + k].iter().map(|v| v - c).sum::<f64>() / k as f64;
            sum += dev.abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InsufficientData {
            needed: k,
            have: values.len(),
        });
    }
    Ok(sum / count as f64 / nonzero_mean(values)? * 100.0)
}

pub fn pq_schoentgen(values: &[f64], k: usize) -> Result<f64> {
    pq_schoentgen_runs(values, k, &[0])
}

/// Mean `|20 log10(A[i+1]/A[i])|` over successive pairs within runs.
pub fn shimmer_db(amplitudes: &[f64], run_starts: &[usize]) -> Result<f64> {
    if amplitudes.contains(&0.0) {
        return Err(Error::ZeroAmplitude);
    }
    let db: Vec<f64> = amplitudes.iter().map(|a| 20.0 * a.log10()).collect();
    mad_successive_runs(&db, run_starts)
}

/// Feature keys produced by [`classical_set`], with units.
pub const CLASSICAL_FEATURES: [(&str, &str); 9] = [
    ("jitter.local_pct", "%"),
    ("jitter.rap_pct", "%"),
    ("jitter.ppq5_pct", "%"),
    ("jitter.mad_s", "s"),
    ("shimmer.local_pct", "%"),
    ("shimmer.apq3_pct", "%"),
    ("shimmer.apq5_pct", "%"),
    ("shimmer.mad", "1"),
    ("shimmer.local_db", "dB"),
];

/// Standard jitter and shimmer measures of a cycle sequence.
pub fn classical_set(cycles: &CycleSequence) -> Result<BTreeMap<String, f64>> {
    classical_set_with_order(cycles, 5)
}

/// Feature keys of [`classical_set_with_order`] for PQ order `k`, with units.
pub fn classical_keys(k: usize) -> Vec<(String, &'static str)> {
    CLASSICAL_FEATURES
        .iter()
        .map(|&(key, unit)| {
            let key = key
                .replace("ppq5", &format!("ppq{k}"))
                .replace("apq5", &format!("apq{k}"));
            (key, unit)
        })
        .collect()
}

/// Like [`classical_set`] but with the PPQ/APQ window set to `k` (odd, ≥ 3).
pub fn classical_set_with_order(cycles: &CycleSequence, k: usize) -> Result<BTreeMap<String, f64>> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "K must be odd and >= 3, got {k}"
        )));
    }
    let n = cycles.len();
    let need = k.max(5);
    if n < need || cycles.runs().iter().all(|r| r.len() < need) {
        return Err(Error::InsufficientData {
            needed: need,
            have: n,
        });
    }
    let t = &cycles.periods;
    let a = &cycles.amplitudes;
    let rs = &cycles.run_starts;
    let t_mad = mad_successive_runs(t, rs)?;
    let a_mad = mad_successive_runs(a, rs)?;
    let values = [
        t_mad / nonzero_mean(t)? * 100.0,
        pq_schoentgen_runs(t, 3, rs)?,
        pq_schoentgen_runs(t, k, rs)?,
        t_mad,
        a_mad / nonzero_mean(a)? * 100.0,
        pq_schoentgen_runs(a, 3, rs)?,
        pq_schoentgen_runs(a, k, rs)?,
        a_mad,
        shimmer_db(a, rs)?,
    ];
    Ok(classical_keys(k)
        .into_iter()
        .zip(values)
        .map(|((key, _), v)| (key, v))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pitch::{estimate_f0_contour, PitchParams};
    use crate::scene::synth;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const RATE: u32 = 44100;

    fn cycles_of(s: &MonoSignal) -> CycleSequence {
        let c = estimate_f0_contour(s, &PitchParams::default()).unwrap();
        extract_cycles(s, &c).unwrap()
    }

    #[test]
    fn sine_cycles_are_uniform() {
        let s = synth::sine(200.0, 0.8, 1.0, RATE).unwrap();
        let cy = cycles_of(&s);
        assert!(cy.len() > 150);
        for t in &cy.periods {
            assert!((t - 0.005).abs() <= 1.0 / RATE as f64);
        }
        let a0 = cy.amplitudes[0];
        assert!(cy.amplitudes.iter().all(|a| (a - a0).abs() < 1e-3));
        let f = classical_set(&cy).unwrap();
        for (k, v) in &f {
            if k.ends_with("_pct") || k.ends_with("_db") {
                assert!(v.abs() <= 1e-6, "{k} = {v}");
            }
        }
    }

    #[test]
    fn ramped_sine_has_rising_amplitudes() {
        let n = RATE as usize;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / RATE as f64;
                (0.5 + 0.5 * t) * (2.0 * std::f64::consts::PI * 200.0 * t).sin()
            })
            .collect();
        let cy = cycles_of(&MonoSignal::new(x, RATE).unwrap());
        for r in cy.runs() {
            assert!(cy.amplitudes[r].windows(2).all(|w| w[1] > w[0]));
        }
        assert!(cy
            .periods
            .iter()
            .all(|t| (t - 0.005).abs() <= 1.0 / RATE as f64));
    }

    #[test]
    fn silence_has_no_cycles() {
        let s = MonoSignal::zeros(RATE as usize, RATE).unwrap();
        let c = estimate_f0_contour(&s, &PitchParams::default()).unwrap();
        assert!(matches!(extract_cycles(&s, &c), Err(Error::NoVoicedFrames)));
    }

    #[test]
    fn alternating_pulse_train_jitter() {
        let times = synth::pulse_times(0.004, &[0.010, 0.0101], 1.5);
        let s = synth::pulse_train(&times, 0.0004, 0.5, 1.5, RATE).unwrap();
        let cy = cycles_of(&s);
        assert!(cy.len() > 100);
        let mad = mad_successive_runs(&cy.periods, &cy.run_starts).unwrap();
        assert!((mad - 1e-4).abs() < 1e-7, "{mad}");
        // direct summation over the extracted contour
        let pq = pq_schoentgen_runs(&cy.periods, 5, &cy.run_starts).unwrap();
        let direct = brute_pq(&cy.periods, &cy.run_starts, 5);
        assert!((pq - direct).abs() <= 1e-12 * direct, "{pq} vs {direct}");
    }

    #[test]
    fn mad_examples() {
        assert_eq!(mad_successive(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(mad_successive(&[1.0, 2.0, 1.0, 2.0]).unwrap(), 1.0);
        assert!((mad_successive_pct(&[1.0, 2.0, 1.0, 2.0]).unwrap() - 200.0 / 3.0).abs() < 1e-12);
        assert!(mad_successive(&[1.0]).is_err());
        assert!(matches!(
            mad_successive_pct(&[1.0, -1.0]),
            Err(Error::ZeroMean)
        ));
    }

    #[test]
    fn pq_examples() {
        assert_eq!(pq_schoentgen(&[2.0; 7], 5).unwrap(), 0.0);
        let pq = pq_schoentgen(&[1.0, 1.0, 2.0, 1.0, 1.0], 3).unwrap();
        assert!((pq - 37.037_037_037_037).abs() < 1e-4);
        assert_eq!(format!("{pq:.2}"), "37.04");
        assert!(pq_schoentgen(&[1.0; 4], 5).is_err());
        assert!(pq_schoentgen(&[1.0; 9], 4).is_err());
        assert!(matches!(
            pq_schoentgen(&[1.0, -1.0, 0.0], 3),
            Err(Error::ZeroMean)
        ));
    }

    #[test]
    fn shimmer_db_closed_form() {
        let a: Vec<f64> = (0..20)
            .map(|i| if i % 2 == 0 { 1.0 } else { 1.1 })
            .collect();
        let cy = CycleSequence::contiguous(vec![0.01; 20], a).unwrap();
        let f = classical_set(&cy).unwrap();
        assert!((f["shimmer.local_db"] - 20.0 * 1.1f64.log10()).abs() < 1e-12);
        assert!((f["shimmer.local_db"] - 0.828).abs() < 1e-3);
    }

    #[test]
    fn zero_amplitude_and_short_sequences() {
        let cy =
            CycleSequence::contiguous(vec![0.01; 6], vec![1.0, 0.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(classical_set(&cy), Err(Error::ZeroAmplitude)));
        let short = CycleSequence::contiguous(vec![0.01; 4], vec![1.0; 4]).unwrap();
        assert!(classical_set(&short).is_err());
        let split = CycleSequence::new(vec![0.01; 8], vec![1.0; 8], vec![0, 4]).unwrap();
        assert!(classical_set(&split).is_err());
    }

    #[test]
    fn sequence_validation() {
        assert!(CycleSequence::new(vec![0.01], vec![1.0, 2.0], vec![0]).is_err());
        assert!(CycleSequence::new(vec![0.0], vec![1.0], vec![0]).is_err());
        assert!(CycleSequence::new(vec![0.01; 3], vec![1.0; 3], vec![1]).is_err());
        assert!(CycleSequence::new(vec![0.01; 3], vec![1.0; 3], vec![0, 3]).is_err());
    }

    #[test]
    fn run_breaks_are_respected() {
        // a jump between runs must not show up
        let t = vec![1.0, 1.0, 1.0, 5.0, 5.0, 5.0];
        assert_eq!(mad_successive_runs(&t, &[0, 3]).unwrap(), 0.0);
        assert!(mad_successive_runs(&t, &[0]).unwrap() > 0.0);
        assert_eq!(pq_schoentgen_runs(&t, 3, &[0, 3]).unwrap(), 0.0);
    }

    fn brute_mad(v: &[f64], starts: &[usize]) -> f64 {
        let mut total = 0.0;
        let mut n = 0.0;
        for i in 1..v.len() {
            if !starts.contains(&i) {
                total += (v[i] - v[i - 1]).abs();
                n += 1.0;
            }
        }
        total / n
    }

    fn brute_pq(v: &[f64], starts: &[usize], k: usize) -> f64 {
        let mut total = 0.0;
        let mut n = 0.0;
        for i in 0..v.len() {
            if i + k > v.len() || (i + 1..i + k).any(|j| starts.contains(&j)) {
                continue;
            }
            let mut s = 0.0;
            for j in 0..k {
                s += v[i + j];
            }
            total += (v[i + (k - 1) / 2] - s / k as f64).abs();
            n += 1.0;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        total / n / mean * 100.0
    }

    #[test]
    fn classical_set_matches_direct_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let n = rng.random_range(12..60);
            let t: Vec<f64> = (0..n)
                .map(|_| 0.005 + rng.random_range(0.0..0.001))
                .collect();
            let a: Vec<f64> = (0..n).map(|_| 0.2 + rng.random_range(0.0..0.8)).collect();
            let split = rng.random_range(5..n - 5);
            let starts = vec![0, split];
            let cy = CycleSequence::new(t.clone(), a.clone(), starts.clone()).unwrap();
            let f = classical_set(&cy).unwrap();
            let mt = t.iter().sum::<f64>() / n as f64;
            let ma = a.iter().sum::<f64>() / n as f64;
            let db: Vec<f64> = a.iter().map(|x| 20.0 * x.log10()).collect();
            let expected = [
                ("jitter.local_pct", brute_mad(&t, &starts) / mt * 100.0),
                ("jitter.rap_pct", brute_pq(&t, &starts, 3)),
                ("jitter.ppq5_pct", brute_pq(&t, &starts, 5)),
                ("jitter.mad_s", brute_mad(&t, &starts)),
                ("shimmer.local_pct", brute_mad(&a, &starts) / ma * 100.0),
                ("shimmer.apq3_pct", brute_pq(&a, &starts, 3)),
                ("shimmer.apq5_pct", brute_pq(&a, &starts, 5)),
                ("shimmer.mad", brute_mad(&a, &starts)),
                ("shimmer.local_db", brute_mad(&db, &starts)),
            ];
            for (k, v) in expected {
                assert!(
                    (f[k] - v).abs() <= 1e-12 * v.abs().max(1e-300),
                    "{k}: {} vs {v}",
                    f[k]
                );
            }
        }
    }

    proptest! {
        #[test]
        fn features_non_negative_and_scale_invariant(
            t in proptest::collection::vec(0.002f64..0.02, 6..40),
            a in proptest::collection::vec(0.01f64..1.0, 40),
            c in 0.1f64..10.0,
        ) {
            let n = t.len();
            let a = a[..n].to_vec();
            let base = classical_set(&CycleSequence::contiguous(t.clone(), a.clone()).unwrap()).unwrap();
            prop_assert!(base.values().all(|v| *v >= 0.0));
            let scaled = CycleSequence::contiguous(
                t.iter().map(|x| x * c).collect(),
                a.iter().map(|x| x * c).collect(),
            ).unwrap();
            let other = classical_set(&scaled).unwrap();
            for k in ["jitter.local_pct", "jitter.rap_pct", "jitter.ppq5_pct", "shimmer.local_pct",
                      "shimmer.apq3_pct", "shimmer.apq5_pct", "shimmer.local_db"] {
                prop_assert!((base[k] - other[k]).abs() <= 1e-9 * base[k].max(1e-9));
            }
        }

        #[test]
        fn constant_contours_give_zero(n in 5usize..50, t in 0.002f64..0.02, a in 0.01f64..1.0) {
            let f = classical_set(&CycleSequence::contiguous(vec![t; n], vec![a; n]).unwrap()).unwrap();
            prop_assert!(f.values().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn pq_order_renames_keys() {
        let periods: Vec<f64> = (0..20).map(|i| 0.005 + 1e-5 * (i % 3) as f64).collect();
        let amps: Vec<f64> = (0..20).map(|i| 0.5 + 0.01 * (i % 2) as f64).collect();
        let cy = CycleSequence::contiguous(periods.clone(), amps.clone()).unwrap();
        let f7 = classical_set_with_order(&cy, 7).unwrap();
        assert_eq!(f7["jitter.ppq7_pct"], pq_schoentgen(&periods, 7).unwrap());
        assert_eq!(f7["shimmer.apq7_pct"], pq_schoentgen(&amps, 7).unwrap());
        let keys: Vec<_> = classical_keys(7).into_iter().map(|(k, _)| k).collect();
        assert_eq!(f7.keys().cloned().collect::<Vec<_>>().len(), keys.len());
        assert!(keys.iter().all(|k| f7.contains_key(k)));
        assert!(classical_set_with_order(&cy, 4).is_err());
    }
}
