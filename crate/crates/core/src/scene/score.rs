use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::MonoSignal;

const SDR_CAP_DB: f64 = 100.0;
const MAX_PERMUTED: usize = 5;

/// Assignment of estimates to references and the resulting quality figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationScore {
    /// `permutation[i]` is the index of the estimate assigned to reference `i`.
    pub permutation: Vec<usize>,
    /// Sign of the Pearson correlation of each assigned pair.
    pub signs: Vec<f64>,
    /// `|r|` per reference, in `[0, 1]`.
    pub per_source_correlation: Vec<f64>,
    pub per_source_si_sdr_db: Vec<f64>,
}

impl SeparationScore {
    pub fn mean_correlation(&self) -> f64 {
        crate::signal::mean(&self.per_source_correlation)
    }

    pub fn mean_si_sdr_db(&self) -> f64 {
        crate::signal::mean(&self.per_source_si_sdr_db)
    }

    pub fn min_correlation(&self) -> f64 {
        self.per_source_correlation
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Pearson correlation coefficient of two equal-length sequences.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    if a.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            have: a.len(),
        });
    }
    let ma = crate::signal::mean(a);
    let mb = crate::signal::mean(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Scale-invariant signal-to-distortion ratio in dB, clamped to `[-100, 100]`.
pub fn si_sdr(estimate: &MonoSignal, reference: &MonoSignal) -> Result<f64> {
    let (e, r) = (estimate.samples(), reference.samples());
    check_lengths(e, r)?;
    if r.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            have: r.len(),
        });
    }
    let rr: f64 = r.iter().map(|v| v * v).sum();
    if rr == 0.0 {
        return Err(Error::ZeroReference);
    }
    let alpha = e.iter().zip(r).map(|(a, b)| a * b).sum::<f64>() / rr;
    let (mut target, mut residual) = (0.0, 0.0);
    for (ev, rv) in e.iter().zip(r) {
        let t = alpha * rv;
        target += t * t;
        residual += (ev - t) * (ev - t);
    }
    if residual <= target * 1e-10 {
        return Ok(SDR_CAP_DB);
    }
    if target == 0.0 {
        return Ok(-SDR_CAP_DB);
    }
    Ok((10.0 * (target / residual).log10()).clamp(-SDR_CAP_DB, SDR_CAP_DB))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Exhaustive search for the estimate/reference pairing with the largest mean `|r|`.
///
/// Ties resolve to the lexicographically first permutation.
pub fn best_permutation(
    estimates: &[MonoSignal],
    references: &[MonoSignal],
) -> Result<SeparationScore> {
    let n = references.len();
    if estimates.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} estimates vs {n} references",
            estimates.len()
        )));
    }
    if n > MAX_PERMUTED {
        return Err(Error::TooManySignals(n));
    }
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, have: 0 });
    }
    // corr[i][k]: reference i vs estimate k
    let corr = references
        .iter()
        .map(|r| {
            estimates
                .iter()
                .map(|e| pearson(e.samples(), r.samples()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in permutations(n) {
        let total: f64 = perm
            .iter()
            .enumerate()
            .map(|(i, &k)| corr[i][k].abs())
            .sum();
        if best.as_ref().is_none_or(|(b, _)| total > *b) {
            best = Some((total, perm));
        }
    }
    let (_, permutation) = best.expect("at least one permutation");
    let signs = permutation
        .iter()
        .enumerate()
        .map(|(i, &k)| if corr[i][k] < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let per_source_correlation = permutation
        .iter()
        .enumerate()
        .map(|(i, &k)| corr[i][k].abs())
        .collect();
    let per_source_si_sdr_db = permutation
        .iter()
        .enumerate()
        .map(|(i, &k)| si_sdr(&estimates[k], &references[i]))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparationScore {
        permutation,
        signs,
        per_source_correlation,
        per_source_si_sdr_db,
    })
}
