//! Ground-truth multi-speaker scenes under the instantaneous mixing model
//! `x_i[n] = Σ_j a_ij s_j[n]`, and scoring of separated estimates against them.

mod score;
pub mod synth;

pub use score::{best_permutation, pearson, si_sdr, SeparationScore};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::MonoSignal;

/// Mixing weights `a_ij`, rows = sensors, columns = sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingMatrix {
    rows: Vec<Vec<f64>>,
}

impl MixingMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::DimensionMismatch("mixing matrix is empty".into()));
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged mixing matrix".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite mixing weight".into()));
        }
        Ok(Self { rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { rows }
    }

    /// Demonstration matrix whose off-diagonal weights fall off with `|i - j|`.
    ///
    /// For three sensors this is `[[1, .5, .3], [.4, 1, .5], [.3, .4, 1]]`.
    pub fn demo(n: usize) -> Self {
        if n == 3 {
            return Self {
                rows: vec![
                    vec![1.0, 0.5, 0.3],
                    vec![0.4, 1.0, 0.5],
                    vec![0.3, 0.4, 1.0],
                ],
            };
        }
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = i.abs_diff(j) as i32;
                        if j > i {
                            0.5f64.powi(d)
                        } else {
                            0.4f64.powi(d)
                        }
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// Sensor-coupling matrix `a_ij = coupling^|i-j|`.
    pub fn decaying(n: usize, coupling: f64) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| coupling.powi(i.abs_diff(j) as i32))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn sensors(&self) -> usize {
        self.rows.len()
    }

    pub fn sources(&self) -> usize {
        self.rows[0].len()
    }

    pub fn weight(&self, sensor: usize, source: usize) -> f64 {
        self.rows[sensor][source]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.sensors(), self.sources(), |i, j| self.rows[i][j])
    }

    /// Ratio of largest to smallest singular value (infinite when singular).
    pub fn condition_number(&self) -> f64 {
        let sv = self.to_matrix().singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= max * 1e-15 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Parse comma-separated rows (one sensor per line). Blank lines and `#` comments are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.split(',')
                    .map(|v| {
                        v.trim().parse::<f64>().map_err(|e| {
                            Error::InvalidParameter(format!("bad mixing weight '{v}': {e}"))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn to_csv(&self) -> String {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| format!("{v}"))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }
}

/// Sources, mixing weights and optional sensor noise of a simulated recording.
#[derive(Debug, Clone)]
pub struct Scene {
    pub sources: Vec<MonoSignal>,
    pub mixing: MixingMatrix,
    /// Per-sensor SNR of the added white Gaussian noise; `None` for a clean mixture.
    pub noise_snr_db: Option<f64>,
    pub seed: u64,
}

impl Scene {
    pub fn new(
        sources: Vec<MonoSignal>,
        mixing: MixingMatrix,
        noise_snr_db: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        let scene = Self {
            sources,
            mixing,
            noise_snr_db,
            seed,
        };
        scene.validate()?;
        Ok(scene)
    }

    fn validate(&self) -> Result<()> {
        if self.sources.len() != self.mixing.sources() {
            return Err(Error::DimensionMismatch(format!(
                "{} sources but mixing matrix has {} columns",
                self.sources.len(),
                self.mixing.sources()
            )));
        }
        let first = &self.sources[0];
        for s in &self.sources[1..] {
            if s.len() != first.len() {
                return Err(Error::LengthMismatch {
                    left: first.len(),
                    right: s.len(),
                });
            }
            if s.sample_rate() != first.sample_rate() {
                return Err(Error::DimensionMismatch(
                    "sources have different sample rates".into(),
                ));
            }
        }
        if let Some(snr) = self.noise_snr_db {
            if !snr.is_finite() {
                return Err(Error::InvalidParameter("SNR must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Render the sensor signals of a scene.
///
/// Noise is drawn from a ChaCha8 generator seeded with `scene.seed`, one
/// independent stream position per sensor in sensor order, so the output is
/// a pure function of the scene.
pub fn mix(scene: &Scene) -> Result<Vec<MonoSignal>> {
    scene.validate()?;
    let n = scene.sources[0].len();
    let rate = scene.sources[0].sample_rate();
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    (0..scene.mixing.sensors())
        .map(|i| {
            let mut x = vec![0.0; n];
            for (j, src) in scene.sources.iter().enumerate() {
                let a = scene.mixing.weight(i, j);
                for (xv, sv) in x.iter_mut().zip(src.samples()) {
                    *xv += a * sv;
                }
            }
            if let Some(snr_db) = scene.noise_snr_db {
                let power = x.iter().map(|v| v * v).sum::<f64>() / n.max(1) as f64;
                let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
                for xv in &mut x {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *xv += sigma * z;
                }
            }
            MonoSignal::new(x, rate)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(v: Vec<f64>) -> MonoSignal {
        MonoSignal::new(v, 8000).unwrap()
    }

    fn random_sources(k: usize, n: usize, seed: u64) -> Vec<MonoSignal> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..k)
            .map(|_| sig((0..n).map(|_| StandardNormal.sample(&mut rng)).collect()))
            .collect()
    }

    #[test]
    fn identity_mixing_is_identity() {
        let src = random_sources(3, 500, 1);
        let scene = Scene::new(src.clone(), MixingMatrix::identity(3), None, 0).unwrap();
        let out = mix(&scene).unwrap();
        assert_eq!(out, src);
    }

    #[test]
    fn single_source_scaling() {
        let src = random_sources(1, 100, 2);
        let scene = Scene::new(
            src.clone(),
            MixingMatrix::new(vec![vec![2.0]]).unwrap(),
            None,
            0,
        )
        .unwrap();
        let out = mix(&scene).unwrap();
        for (o, s) in out[0].samples().iter().zip(src[0].samples()) {
            assert_eq!(*o, 2.0 * s);
        }
    }

    #[test]
    fn demo_matrix_matches_loop_oracle() {
        let src = random_sources(3, 1000, 3);
        let a = [[1.0, 0.5, 0.3], [0.4, 1.0, 0.5], [0.3, 0.4, 1.0]];
        let scene = Scene::new(src.clone(), MixingMatrix::demo(3), None, 0).unwrap();
        let out = mix(&scene).unwrap();
        for i in 0..3 {
            for n in 0..1000 {
                let mut expected = 0.0;
                for j in 0..3 {
                    expected += a[i][j] * src[j].samples()[n];
                }
                assert!((out[i].samples()[n] - expected).abs() < 1e-15);
            }
        }
        assert!(MixingMatrix::demo(3).condition_number() < 10.0);
    }

    #[test]
    fn dimension_errors() {
        let src = random_sources(2, 10, 4);
        assert!(Scene::new(src.clone(), MixingMatrix::identity(3), None, 0).is_err());
        let uneven = vec![src[0].clone(), sig(vec![0.0; 9])];
        assert!(matches!(
            Scene::new(uneven, MixingMatrix::identity(2), None, 0),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(MixingMatrix::new(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn noise_hits_requested_snr() {
        let src = random_sources(3, 44100, 5);
        for snr in [0.0, 10.0, 20.0] {
            let clean =
                mix(&Scene::new(src.clone(), MixingMatrix::demo(3), None, 9).unwrap()).unwrap();
            let noisy = mix(&Scene::new(src.clone(), MixingMatrix::demo(3), Some(snr), 9).unwrap())
                .unwrap();
            for (c, x) in clean.iter().zip(&noisy) {
                let ps: f64 = c.samples().iter().map(|v| v * v).sum();
                let pn: f64 = c
                    .samples()
                    .iter()
                    .zip(x.samples())
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                let measured = 10.0 * (ps / pn).log10();
                assert!((measured - snr).abs() < 0.5, "{measured} vs {snr}");
            }
        }
    }

    #[test]
    fn seeded_noise_is_deterministic() {
        let src = random_sources(2, 1000, 6);
        let scene = Scene::new(src, MixingMatrix::identity(2), Some(5.0), 42).unwrap();
        assert_eq!(mix(&scene).unwrap(), mix(&scene).unwrap());
    }

    #[test]
    fn csv_round_trip() {
        let m = MixingMatrix::demo(3);
        assert_eq!(MixingMatrix::from_csv(&m.to_csv()).unwrap(), m);
        assert!(MixingMatrix::from_csv("1,x\n").is_err());
    }

    proptest::proptest! {
        #[test]
        fn mixing_is_linear(seed in 0u64..500, alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
            let s = random_sources(3, 64, seed);
            let t = random_sources(3, 64, seed + 1000);
            let combo: Vec<MonoSignal> = s.iter().zip(&t).map(|(a, b)| {
                sig(a.samples().iter().zip(b.samples()).map(|(x, y)| alpha * x + beta * y).collect())
            }).collect();
            let m = MixingMatrix::demo(3);
            let ms = mix(&Scene::new(s, m.clone(), None, 0).unwrap()).unwrap();
            let mt = mix(&Scene::new(t, m.clone(), None, 0).unwrap()).unwrap();
            let mc = mix(&Scene::new(combo, m, None, 0).unwrap()).unwrap();
            for i in 0..3 {
                for n in 0..64 {
                    let lhs = mc[i].samples()[n];
                    let rhs = alpha * ms[i].samples()[n] + beta * mt[i].samples()[n];
                    proptest::prop_assert!((lhs - rhs).abs() < 1e-9);
                }
            }
        }
    }
}
