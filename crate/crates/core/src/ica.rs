//! FastICA blind source separation.
//!
//! Mixtures are centred and whitened (`X' = P D^{-1/2} Pᵀ X` with
//! `E[XXᵀ] = P D Pᵀ`), then unit vectors `w` maximizing the negentropy
//! approximation `J(wᵀx') = [E G(wᵀx') - E G(v)]²` are found one at a time by
//! the fixed-point update
//!
//! ```text
//! w⁺ = E{x' g(wᵀx')} - E{g'(wᵀx')} w,    g = G'
//! ```
//!
//! with Gram-Schmidt deflation against the directions already extracted.
//! Separated signals are returned at unit variance; their order is the
//! extraction order unless reference signals are supplied.

use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{best_permutation, SeparationScore};
use crate::signal::{self, MonoSignal};

const DEGENERACY_RATIO: f64 = 1e-10;

/// Non-quadratic contrast `G` used by the negentropy approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Contrast {
    /// `G(u) = log cosh u`, `g(u) = tanh u`.
    #[default]
    LogCosh,
    /// `G(u) = -exp(-u²/2)`, `g(u) = u exp(-u²/2)`.
    Gauss,
}

impl Contrast {
    pub fn id(self) -> &'static str {
        match self {
            Contrast::LogCosh => "logcosh",
            Contrast::Gauss => "gauss",
        }
    }

    pub fn value(self, u: f64) -> f64 {
        match self {
            Contrast::LogCosh => {
                // log cosh u = |u| + log(1 + e^{-2|u|}) - log 2, stable for large |u|
                let a = u.abs();
                a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
            }
            Contrast::Gauss => -(-0.5 * u * u).exp(),
        }
    }

    /// `(g(u), g'(u))`.
    fn derivatives(self, u: f64) -> (f64, f64) {
        match self {
            Contrast::LogCosh => {
                let t = u.tanh();
                (t, 1.0 - t * t)
            }
            Contrast::Gauss => {
                let e = (-0.5 * u * u).exp();
                (u * e, (1.0 - u * u) * e)
            }
        }
    }

    /// `E[G(v)]` for a standard Gaussian `v`, by composite Simpson quadrature on `[-12, 12]`.
    pub fn gaussian_expectation(self) -> f64 {
        static LOGCOSH: OnceLock<f64> = OnceLock::new();
        static GAUSS: OnceLock<f64> = OnceLock::new();
        let cell = match self {
            Contrast::LogCosh => &LOGCOSH,
            Contrast::Gauss => &GAUSS,
        };
        *cell.get_or_init(|| {
            let intervals = 48_000;
            let (a, b) = (-12.0, 12.0);
            let h = (b - a) / intervals as f64;
            let f =
                |v: f64| self.value(v) * (-0.5 * v * v).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let mut sum = f(a) + f(b);
            for i in 1..intervals {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                sum += w * f(a + i as f64 * h);
            }
            sum * h / 3.0
        })
    }
}

impl FromStr for Contrast {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logcosh" | "tanh" => Ok(Contrast::LogCosh),
            "gauss" | "exp" => Ok(Contrast::Gauss),
            other => Err(Error::UnknownContrast(other.to_string())),
        }
    }
}

/// Standardize to zero mean and unit (1/N) variance.
fn standardize(y: &[f64]) -> Result<Vec<f64>> {
    let m = signal::mean(y);
    let var = signal::variance(y);
    if var <= 0.0 || !var.is_finite() {
        return Err(Error::ZeroVariance);
    }
    let sd = var.sqrt();
    Ok(y.iter().map(|v| (v - m) / sd).collect())
}

/// Excess kurtosis `E(y⁴) - 3` of the standardized sample.
pub fn kurtosis(y: &[f64]) -> Result<f64> {
    if y.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            have: y.len(),
        });
    }
    let z = standardize(y)?;
    Ok(z.iter().map(|v| v.powi(4)).sum::<f64>() / z.len() as f64 - 3.0)
}

/// Negentropy approximation `[E G(y) - E G(v)]²` with `k = 1`, on the standardized sample.
pub fn negentropy_approx(y: &[f64], contrast: Contrast) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            have: y.len(),
        });
    }
    let z = standardize(y)?;
    let eg = z.iter().map(|&v| contrast.value(v)).sum::<f64>() / z.len() as f64;
    let d = eg - contrast.gaussian_expectation();
    Ok(d * d)
}

/// Rescale a signal to unit (1/N) variance. The mean is left in place.
pub fn normalize_unit_variance(signal: &MonoSignal) -> Result<MonoSignal> {
    let var = signal.variance();
    if var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    signal.scaled(1.0 / var.sqrt())
}

/// Subtract each channel's mean. Rows are channels.
pub fn center(x: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    if x.nrows() == 0 || x.ncols() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            have: x.ncols(),
        });
    }
    let means: Vec<f64> = x.row_iter().map(|r| r.mean()).collect();
    let mut out = x.clone();
    for (mut row, m) in out.row_iter_mut().zip(&means) {
        row.add_scalar_mut(-m);
    }
    Ok((out, means))
}

/// The whitening map fitted on a set of mixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhiteningTransform {
    /// Per-channel means removed before whitening.
    pub means: Vec<f64>,
    /// Orthonormal eigenvectors of the covariance as columns (`P`), row-major.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Covariance eigenvalues (`D`), descending.
    pub eigenvalues: Vec<f64>,
    /// Whitening matrix, `components × channels`, row-major.
    pub matrix: Vec<Vec<f64>>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

struct Whitened {
    data: DMatrix<f64>,
    matrix: DMatrix<f64>,
    dewhiten: DMatrix<f64>,
    eigenvectors: DMatrix<f64>,
    eigenvalues: Vec<f64>,
}

fn whiten_to(x: &DMatrix<f64>, components: usize) -> Result<Whitened> {
    let channels = x.nrows();
    let n = x.ncols() as f64;
    let cov = (x * x.transpose()) / n;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..channels).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(channels, channels, |r, c| eig.eigenvectors[(r, order[c])]);

    let largest = values[0];
    let smallest = values[components - 1];
    if !(largest > 0.0) || smallest < DEGENERACY_RATIO * largest {
        return Err(Error::DegenerateCovariance {
            ratio: if largest > 0.0 {
                smallest / largest
            } else {
                0.0
            },
        });
    }
    let p = vectors.columns(0, components).into_owned();
    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(
        components,
        values[..components].iter().map(|v| 1.0 / v.sqrt()),
    ));
    let sqrt = DMatrix::from_diagonal(&DVector::from_iterator(
        components,
        values[..components].iter().map(|v| v.sqrt()),
    ));
    // Full rank keeps the symmetric form P D^{-1/2} Pᵀ; a reduced set keeps D^{-1/2} Pᵀ.
    let (matrix, dewhiten) = if components == channels {
        (&p * &inv_sqrt * p.transpose(), &p * &sqrt * p.transpose())
    } else {
        (&inv_sqrt * p.transpose(), &p * &sqrt)
    };
    let data = &matrix * x;
    Ok(Whitened {
        data,
        matrix,
        dewhiten,
        eigenvectors: vectors,
        eigenvalues: values,
    })
}

/// Whiten centred data so its sample covariance (1/N) is the identity.
pub fn whiten(x: &DMatrix<f64>) -> Result<(DMatrix<f64>, WhiteningTransform)> {
    if x.nrows() == 0 || x.ncols() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            have: x.ncols(),
        });
    }
    let w = whiten_to(x, x.nrows())?;
    let transform = WhiteningTransform {
        means: x.row_iter().map(|r| r.mean()).collect(),
        eigenvectors: rows_of(&w.eigenvectors),
        eigenvalues: w.eigenvalues,
        matrix: rows_of(&w.matrix),
    };
    Ok((w.data, transform))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FastIcaParams {
    /// Number of sources to extract; `None` means one per input channel.
    pub n_components: Option<usize>,
    pub contrast: Contrast,
    pub tol: f64,
    pub max_iter: usize,
    /// Fresh random restarts for a component that fails to converge.
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for FastIcaParams {
    fn default() -> Self {
        Self {
            n_components: None,
            contrast: Contrast::LogCosh,
            tol: 1e-6,
            max_iter: 200,
            max_restarts: 3,
            seed: 0,
        }
    }
}

/// Unit-norm directions in whitened space, one per extracted source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnmixingMatrix {
    pub rows: Vec<Vec<f64>>,
    /// Fixed-point iterations used by the final attempt of each component.
    pub iterations: Vec<usize>,
    pub restarts: Vec<usize>,
    pub converged: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceOrder {
    /// Deflation order; carries no meaning about which speaker is which.
    Extraction,
    /// Matched to reference signals by [`best_permutation`].
    Reference,
}

#[derive(Debug, Clone)]
pub struct SeparationResult {
    /// Separated signals at unit variance.
    pub sources: Vec<MonoSignal>,
    pub whitening: WhiteningTransform,
    pub unmixing: UnmixingMatrix,
    /// Estimated mixing weights, `channels × components`, row-major.
    pub mixing_estimate: Vec<Vec<f64>>,
    pub order: SourceOrder,
    pub score: Option<SeparationScore>,
}

impl SeparationResult {
    pub fn all_converged(&self) -> bool {
        self.unmixing.converged.iter().all(|c| *c)
    }
}

fn gram_schmidt(w: &mut DVector<f64>, found: &[DVector<f64>]) {
    for b in found {
        let proj = w.dot(b);
        w.axpy(-proj, b, 1.0);
    }
}

struct Component {
    w: DVector<f64>,
    iterations: usize,
    restarts: usize,
    converged: bool,
}

fn extract_component(
    z: &DMatrix<f64>,
    found: &[DVector<f64>],
    params: &FastIcaParams,
    rng: &mut ChaCha8Rng,
) -> Component {
    let dim = z.nrows();
    let n = z.ncols() as f64;
    let mut last = None;
    for attempt in 0..=params.max_restarts {
        let mut w = DVector::from_fn(dim, |_, _| StandardNormal.sample(rng));
        gram_schmidt(&mut w, found);
        if w.norm() < 1e-12 {
            w = DVector::from_fn(dim, |i, _| if i == found.len() { 1.0 } else { 0.0 });
            gram_schmidt(&mut w, found);
        }
        w.normalize_mut();
        for it in 1..=params.max_iter {
            let u = z.tr_mul(&w);
            let mut g = DVector::zeros(u.len());
            let mut dg_sum = 0.0;
            for (gi, &ui) in g.iter_mut().zip(u.iter()) {
                let (a, b) = params.contrast.derivatives(ui);
                *gi = a;
                dg_sum += b;
            }
            let mut next = (z * g) / n - &w * (dg_sum / n);
            gram_schmidt(&mut next, found);
            let norm = next.norm();
            if norm == 0.0 || !norm.is_finite() {
                break;
            }
            next /= norm;
            let done = (next.dot(&w).abs() - 1.0).abs() < params.tol;
            w = next;
            if done {
                return Component {
                    w,
                    iterations: it,
                    restarts: attempt,
                    converged: true,
                };
            }
        }
        last = Some(Component {
            w,
            iterations: params.max_iter,
            restarts: attempt,
            converged: false,
        });
    }
    last.expect("at least one attempt")
}

type CoreOutput = (
    Vec<Vec<f64>>,
    WhiteningTransform,
    UnmixingMatrix,
    DMatrix<f64>,
);

/// Run FastICA on multichannel data (rows are channels).
///
/// Returns `(sources, whitening, unmixing, mixing_estimate)` with sources as
/// rows of unit variance and sign fixed so that the largest-magnitude entry of
/// each estimated mixing column is positive.
fn fastica_core(x: &DMatrix<f64>, params: &FastIcaParams) -> Result<CoreOutput> {
    let channels = x.nrows();
    let k = params.n_components.unwrap_or(channels);
    if k == 0 || k > channels {
        return Err(Error::InvalidParameter(format!(
            "cannot extract {k} components from {channels} channels"
        )));
    }
    if !(params.tol > 0.0 && params.tol < 1.0) || params.max_iter == 0 {
        return Err(Error::InvalidParameter(
            "tol must be in (0, 1) and max_iter positive".into(),
        ));
    }
    let (centred, means) = center(x)?;
    let wh = whiten_to(&centred, k)?;
    let z = &wh.data;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut found: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut unmixing = UnmixingMatrix {
        rows: Vec::with_capacity(k),
        iterations: Vec::with_capacity(k),
        restarts: Vec::with_capacity(k),
        converged: Vec::with_capacity(k),
    };
    for _ in 0..k {
        let c = extract_component(z, &found, params, &mut rng);
        unmixing.iterations.push(c.iterations);
        unmixing.restarts.push(c.restarts);
        unmixing.converged.push(c.converged);
        found.push(c.w);
    }

    let mut mixing = DMatrix::zeros(channels, k);
    let mut sources = Vec::with_capacity(k);
    for (j, w) in found.iter_mut().enumerate() {
        let mut col = &wh.dewhiten * &*w;
        let pivot = col
            .iter()
            .cloned()
            .fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
        if pivot < 0.0 {
            *w = -&*w;
            col = -col;
        }
        mixing.set_column(j, &col);
        let y: Vec<f64> = z.tr_mul(w).iter().copied().collect();
        sources.push(standardize(&y)?);
        unmixing.rows.push(w.iter().copied().collect());
    }
    let whitening = WhiteningTransform {
        means,
        eigenvectors: rows_of(&wh.eigenvectors),
        eigenvalues: wh.eigenvalues,
        matrix: rows_of(&wh.matrix),
    };
    Ok((sources, whitening, unmixing, mixing))
}

/// Separate `mixtures` (one signal per sensor) into independent sources.
///
/// With `references`, output order and sign follow the best-correlated
/// reference and the score is attached; otherwise the extraction order is kept.
pub fn fastica(
    mixtures: &[MonoSignal],
    params: &FastIcaParams,
    references: Option<&[MonoSignal]>,
) -> Result<SeparationResult> {
    let first = mixtures
        .first()
        .ok_or_else(|| Error::InvalidParameter("no input channels".into()))?;
    let (n, rate) = (first.len(), first.sample_rate());
    for m in mixtures {
        if m.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: m.len(),
            });
        }
        if m.sample_rate() != rate {
            return Err(Error::DimensionMismatch(
                "mixtures have different sample rates".into(),
            ));
        }
    }
    let x = DMatrix::from_fn(mixtures.len(), n, |i, t| mixtures[i].samples()[t]);
    let (rows, whitening, mut unmixing, mut mixing) = fastica_core(&x, params)?;
    let mut sources = rows
        .into_iter()
        .map(|r| MonoSignal::new(r, rate))
        .collect::<Result<Vec<_>>>()?;

    let mut order = SourceOrder::Extraction;
    let mut score = None;
    if let Some(refs) = references {
        let s = best_permutation(&sources, refs)?;
        let perm = s.permutation.clone();
        let reordered: Vec<MonoSignal> = perm
            .iter()
            .zip(&s.signs)
            .map(|(&k, &sign)| sources[k].scaled(sign))
            .collect::<Result<_>>()?;
        let old = unmixing.clone();
        let old_mixing = mixing.clone();
        for (i, (&k, &sign)) in perm.iter().zip(&s.signs).enumerate() {
            unmixing.rows[i] = old.rows[k].iter().map(|v| v * sign).collect();
            unmixing.iterations[i] = old.iterations[k];
            unmixing.restarts[i] = old.restarts[k];
            unmixing.converged[i] = old.converged[k];
            mixing.set_column(i, &(old_mixing.column(k) * sign));
        }
        sources = reordered;
        order = SourceOrder::Reference;
        score = Some(SeparationScore {
            permutation: (0..perm.len()).collect(),
            signs: vec![1.0; perm.len()],
            ..s
        });
    }
    Ok(SeparationResult {
        sources,
        whitening,
        unmixing,
        mixing_estimate: rows_of(&mixing),
        order,
        score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{mix, synth, MixingMatrix, Scene};
    use rand_distr::Uniform;

    fn cov(x: &DMatrix<f64>) -> DMatrix<f64> {
        x * x.transpose() / x.ncols() as f64
    }

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn center_examples() {
        let x = DMatrix::from_row_slice(1, 3, &[5.0, 5.0, 5.0]);
        let (c, m) = center(&x).unwrap();
        assert_eq!(m, vec![5.0]);
        assert!(c.iter().all(|v| *v == 0.0));

        let x = DMatrix::from_row_slice(1, 4, &[-1.5, 0.5, 1.5, -0.5]);
        let (c, _) = center(&x).unwrap();
        assert_eq!(c, x);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = Uniform::new(-10.0, 50.0).unwrap();
        let x = DMatrix::from_fn(3, 10_000, |_, _| u.sample(&mut rng));
        let (c, _) = center(&x).unwrap();
        for row in c.row_iter() {
            assert!(row.iter().sum::<f64>().abs() / 10_000.0 < 1e-12);
        }
        assert!(center(&DMatrix::<f64>::zeros(2, 1)).is_err());
    }

    #[test]
    fn whitening_examples() {
        let data: Vec<f64> = (0..3).flat_map(|k| gaussian(50_000, k)).collect();
        let x = DMatrix::from_row_slice(3, 50_000, &data);
        let (c, _) = center(&x).unwrap();
        let (xw, t) = whiten(&c).unwrap();
        let id = DMatrix::<f64>::identity(3, 3);
        assert!((cov(&xw) - &id).amax() < 1e-6);
        let p = DMatrix::from_fn(3, 3, |i, j| t.eigenvectors[i][j]);
        assert!((p.transpose() * &p - &id).amax() < 1e-10);
        assert!(t.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        // already white: V is near-orthogonal, close to identity up to a rotation
        let v = DMatrix::from_fn(3, 3, |i, j| t.matrix[i][j]);
        assert!((v.transpose() * &v - &id).amax() < 0.05);

        let single = DMatrix::from_row_slice(1, 4, &[10.0, -10.0, 20.0, -20.0]);
        let (w1, _) = whiten(&single).unwrap();
        assert!((cov(&w1)[(0, 0)] - 1.0).abs() < 1e-12);

        let g = gaussian(1000, 9);
        let dup = DMatrix::from_fn(2, 1000, |_, j| g[j]);
        let (dc, _) = center(&dup).unwrap();
        assert!(matches!(
            whiten(&dc),
            Err(Error::DegenerateCovariance { .. })
        ));
    }

    #[test]
    fn kurtosis_examples() {
        let g = gaussian(200_000, 1);
        assert!(kurtosis(&g).unwrap().abs() < 0.1);
        let u = synth::uniform_noise(4.0, 50_000, 2).unwrap();
        assert!((kurtosis(u.samples()).unwrap() + 1.2).abs() < 0.05);
        let two: Vec<f64> = (0..1000)
            .map(|i| if i % 2 == 0 { -1.0 } else { 1.0 })
            .collect();
        assert!((kurtosis(&two).unwrap() + 2.0).abs() < 1e-12);
        assert!(matches!(kurtosis(&[1.0; 10]), Err(Error::ZeroVariance)));
        assert!(kurtosis(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn gaussian_expectations_match_closed_form_and_frozen_quadrature() {
        // -1/sqrt(2) in closed form; log cosh value frozen from a 30-digit adaptive quadrature
        assert!(
            (Contrast::Gauss.gaussian_expectation() + std::f64::consts::FRAC_1_SQRT_2).abs()
                < 1e-12
        );
        assert!((Contrast::LogCosh.gaussian_expectation() - 0.374_567_207_491_438).abs() < 1e-12);
    }

    #[test]
    fn negentropy_examples() {
        let g = gaussian(200_000, 5);
        let l = synth::laplace_noise(4.0, 50_000, 6).unwrap();
        for c in [Contrast::LogCosh, Contrast::Gauss] {
            let jg = negentropy_approx(&g, c).unwrap();
            let jl = negentropy_approx(l.samples(), c).unwrap();
            assert!((0.0..=1e-3).contains(&jg), "{jg}");
            assert!(jl > jg);
        }
        assert!(matches!(
            "cube".parse::<Contrast>(),
            Err(Error::UnknownContrast(_))
        ));
        assert_eq!("tanh".parse::<Contrast>().unwrap(), Contrast::LogCosh);
        assert!(matches!(
            negentropy_approx(&[2.0; 5], Contrast::Gauss),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn logcosh_is_stable() {
        assert!((Contrast::LogCosh.value(1.0) - 1f64.cosh().ln()).abs() < 1e-15);
        assert!(Contrast::LogCosh.value(800.0).is_finite());
    }

    #[test]
    fn normalize_examples() {
        let s = MonoSignal::new(vec![2.0, -2.0, 2.0, -2.0], 8000).unwrap();
        let out = normalize_unit_variance(&s).unwrap();
        assert_eq!(out.samples(), &[1.0, -1.0, 1.0, -1.0]);
        let again = normalize_unit_variance(&out).unwrap();
        for (a, b) in again.samples().iter().zip(out.samples()) {
            assert!((a - b).abs() < 1e-10);
        }
        let peaked = MonoSignal::new(vec![0.1, -0.7, 0.3, 0.2], 8000).unwrap();
        let n = normalize_unit_variance(&peaked).unwrap();
        assert!((n.variance() - 1.0).abs() < 1e-10);
        let argmax = |x: &[f64]| {
            x.iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .unwrap()
                .0
        };
        assert_eq!(argmax(n.samples()), argmax(peaked.samples()));
        assert!(normalize_unit_variance(&MonoSignal::new(vec![3.0; 4], 8000).unwrap()).is_err());
    }

    #[test]
    fn single_channel_is_standardized_input() {
        let x = synth::uniform_noise(0.5, 8000, 11)
            .unwrap()
            .scaled(0.3)
            .unwrap();
        let res = fastica(std::slice::from_ref(&x), &FastIcaParams::default(), None).unwrap();
        let expected = standardize(x.samples()).unwrap();
        for (a, b) in res.sources[0].samples().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn two_uniform_sources() {
        let rate = 8000;
        let sources = vec![
            synth::uniform_noise(5.0, rate, 21).unwrap(),
            synth::uniform_noise(5.0, rate, 22).unwrap(),
        ];
        let mixing = MixingMatrix::new(vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let x = mix(&Scene::new(sources.clone(), mixing, None, 0).unwrap()).unwrap();
        for contrast in [Contrast::LogCosh, Contrast::Gauss] {
            let params = FastIcaParams {
                contrast,
                seed: 4,
                ..Default::default()
            };
            let res = fastica(&x, &params, Some(&sources)).unwrap();
            let score = res.score.as_ref().unwrap();
            assert!(score.min_correlation() >= 0.99, "{score:?}");
            assert!(res.all_converged());
            for s in &res.sources {
                assert!((s.variance() - 1.0).abs() < 1e-6);
            }
            for i in 0..2 {
                let wi = DVector::from_vec(res.unmixing.rows[i].clone());
                assert!((wi.norm() - 1.0).abs() < 1e-10);
                for j in 0..i {
                    let wj = DVector::from_vec(res.unmixing.rows[j].clone());
                    assert!(wi.dot(&wj).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn deterministic_and_reduced_components() {
        let src = synth::demo_sources(3, 1.0, 8000).unwrap();
        let x = mix(&Scene::new(src, MixingMatrix::demo(3), None, 0).unwrap()).unwrap();
        let params = FastIcaParams {
            seed: 9,
            ..Default::default()
        };
        let a = fastica(&x, &params, None).unwrap();
        let b = fastica(&x, &params, None).unwrap();
        assert_eq!(a.sources, b.sources);
        assert_eq!(a.unmixing, b.unmixing);
        assert_eq!(a.order, SourceOrder::Extraction);

        let two = fastica(
            &x,
            &FastIcaParams {
                n_components: Some(2),
                ..params.clone()
            },
            None,
        )
        .unwrap();
        assert_eq!(two.sources.len(), 2);
        assert_eq!(two.whitening.matrix.len(), 2);
        assert_eq!(two.mixing_estimate.len(), 3);

        let too_many = FastIcaParams {
            n_components: Some(4),
            ..params
        };
        assert!(fastica(&x, &too_many, None).is_err());
    }

    #[test]
    fn three_am_sawtooths_with_demo_matrix() {
        let src = synth::demo_sources(3, 3.0, 8000).unwrap();
        let x = mix(&Scene::new(src.clone(), MixingMatrix::demo(3), None, 0).unwrap()).unwrap();
        let res = fastica(&x, &FastIcaParams::default(), Some(&src)).unwrap();
        let score = res.score.unwrap();
        assert!(score.min_correlation() >= 0.95, "{score:?}");
        assert_eq!(res.order, SourceOrder::Reference);
    }

    #[test]
    fn channel_scaling_leaves_scores_unchanged() {
        let src = synth::demo_sources(3, 2.0, 8000).unwrap();
        let x = mix(&Scene::new(src.clone(), MixingMatrix::demo(3), None, 0).unwrap()).unwrap();
        let base = fastica(&x, &FastIcaParams::default(), Some(&src)).unwrap();
        let mut scaled = x.clone();
        scaled[1] = scaled[1].scaled(7.5).unwrap();
        let other = fastica(&scaled, &FastIcaParams::default(), Some(&src)).unwrap();
        let a = &base.score.unwrap().per_source_correlation;
        let b = &other.score.unwrap().per_source_correlation;
        for (p, q) in a.iter().zip(b) {
            assert!((p.abs() - q.abs()).abs() < 0.01);
        }
    }

    #[test]
    fn mixing_estimate_reconstructs_centred_mixtures() {
        let src = synth::demo_sources(3, 1.0, 8000).unwrap();
        let x = mix(&Scene::new(src, MixingMatrix::demo(3), None, 0).unwrap()).unwrap();
        let res = fastica(&x, &FastIcaParams::default(), None).unwrap();
        // x - mean = A * (s * sd_k); since sources are unit variance the
        // reconstruction is exact up to the per-source scale absorbed in A
        let a = DMatrix::from_fn(3, 3, |i, j| res.mixing_estimate[i][j]);
        let s = DMatrix::from_fn(3, 8000, |i, t| res.sources[i].samples()[t]);
        let recon = &a * &s;
        for i in 0..3 {
            let m = res.whitening.means[i];
            for t in (0..8000).step_by(97) {
                assert!((recon[(i, t)] - (x[i].samples()[t] - m)).abs() < 1e-8);
            }
        }
    }
}
