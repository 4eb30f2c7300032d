use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use voxsep::scene::{mix, synth, MixingMatrix, Scene};
use voxsep::signal::{decode_wav, encode_wav};
use voxsep::MonoSignal;

use super::Context;
use crate::error::{CliError, CliResult};
use crate::io::{
    digest_file, ensure_dir, file_name, load_mono, sha256_hex, write_bytes, write_json,
};

/// Scene description read by `simulate`. Paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneManifest {
    pub sources: Vec<PathBuf>,
    /// `"identity"`, `"demo"` or a path to a mixing CSV (rows = sensors).
    pub mixing: String,
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy)]
pub struct DemoOptions {
    pub sources: usize,
    pub duration_s: f64,
    pub sample_rate: u32,
    pub snr_db: Option<f64>,
}

impl Default for DemoOptions {
    fn default() -> Self {
        Self {
            sources: 3,
            duration_s: 5.0,
            sample_rate: 44100,
            snr_db: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrittenFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorFile {
    pub file: String,
    pub sha256: String,
    /// Samples outside the 16-bit range that were clamped.
    pub clipped_samples: usize,
}

/// Contents of `scene.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneMetadata {
    pub schema_version: String,
    pub seed: u64,
    pub snr_db: Option<f64>,
    pub mixing_kind: String,
    pub mixing: Vec<Vec<f64>>,
    /// `None` when the matrix is singular.
    pub condition_number: Option<f64>,
    pub sample_rate: u32,
    pub samples: usize,
    pub sources: Vec<WrittenFile>,
    pub source_origins: Vec<String>,
    pub sensors: Vec<SensorFile>,
}

fn mixing_from(spec: &str, n: usize, base: &Path) -> CliResult<(MixingMatrix, String)> {
    match spec {
        "identity" => Ok((MixingMatrix::identity(n), "identity".into())),
        "demo" => Ok((MixingMatrix::demo(n), "demo".into())),
        path => {
            let p = base.join(path);
            let text = std::fs::read_to_string(&p).map_err(|e| {
                CliError::Data(format!("cannot read mixing CSV {}: {e}", p.display()))
            })?;
            Ok((MixingMatrix::from_csv(&text)?, file_name(&p)))
        }
    }
}

/// Simulate the scene described by a manifest file.
pub fn simulate_manifest(path: &Path, ctx: &Context) -> CliResult<SceneMetadata> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
    let manifest: SceneManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("invalid scene manifest: {e}")))?;
    if manifest.sources.is_empty() {
        return Err(CliError::Data("scene manifest lists no sources".into()));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut sources = Vec::new();
    let mut origins = Vec::new();
    for s in &manifest.sources {
        let p = base.join(s);
        origins.push(digest_file(&p)?.name);
        sources.push(load_mono(&p)?);
    }
    let (mixing, kind) = mixing_from(&manifest.mixing, sources.len(), base)?;
    let seed = ctx.seed_override.or(manifest.seed).unwrap_or(ctx.cfg.seed);
    let scene = Scene::new(sources, mixing, manifest.snr_db, seed)?;
    write_scene(&scene, &kind, origins, &ctx.out)
}

/// Simulate the built-in talkers through the demo mixing matrix.
pub fn simulate_demo(opts: DemoOptions, ctx: &Context) -> CliResult<SceneMetadata> {
    if opts.sources == 0 || opts.sources > 5 {
        return Err(CliError::Usage(format!(
            "demo supports 1 to 5 sources, got {}",
            opts.sources
        )));
    }
    // mix the 16-bit sources that are written out, so the manifest reproduces the scene
    let sources = synth::demo_sources(opts.sources, opts.duration_s, opts.sample_rate)?
        .iter()
        .map(|s| Ok(decode_wav(&encode_wav(s)?)?.remove(0)))
        .collect::<CliResult<Vec<_>>>()?;
    let seed = ctx.seed_override.unwrap_or(ctx.cfg.seed);
    let scene = Scene::new(sources, MixingMatrix::demo(opts.sources), opts.snr_db, seed)?;
    let origins = (1..=opts.sources)
        .map(|j| format!("demo talker {j}"))
        .collect();
    let meta = write_scene(&scene, "demo", origins, &ctx.out)?;
    let manifest = SceneManifest {
        sources: meta
            .sources
            .iter()
            .map(|f| PathBuf::from(&f.file))
            .collect(),
        mixing: "demo".into(),
        snr_db: opts.snr_db,
        seed: Some(seed),
    };
    write_json(&ctx.out.join("manifest.json"), &manifest)?;
    Ok(meta)
}

fn clipped(s: &MonoSignal) -> usize {
    s.samples()
        .iter()
        .filter(|v| **v > 1.0 - 1.0 / 32768.0 || **v < -1.0)
        .count()
}

fn write_scene(
    scene: &Scene,
    kind: &str,
    origins: Vec<String>,
    out: &Path,
) -> CliResult<SceneMetadata> {
    ensure_dir(&out.join("sources"))?;
    let mut sources = Vec::new();
    for (j, s) in scene.sources.iter().enumerate() {
        let file = format!("sources/s{}.wav", j + 1);
        let bytes = encode_wav(s)?;
        write_bytes(&out.join(&file), &bytes)?;
        sources.push(WrittenFile {
            file,
            sha256: sha256_hex(&bytes),
        });
    }
    let mut sensors = Vec::new();
    for (i, x) in mix(scene)?.iter().enumerate() {
        let file = format!("x{}.wav", i + 1);
        let bytes = encode_wav(x)?;
        write_bytes(&out.join(&file), &bytes)?;
        sensors.push(SensorFile {
            file,
            sha256: sha256_hex(&bytes),
            clipped_samples: clipped(x),
        });
    }
    write_bytes(&out.join("mixing.csv"), scene.mixing.to_csv().as_bytes())?;
    let cond = scene.mixing.condition_number();
    let meta = SceneMetadata {
        schema_version: "1.0.0".into(),
        seed: scene.seed,
        snr_db: scene.noise_snr_db,
        mixing_kind: kind.into(),
        mixing: scene.mixing.rows().to_vec(),
        condition_number: cond.is_finite().then_some(cond),
        sample_rate: scene.sources[0].sample_rate(),
        samples: scene.sources[0].len(),
        sources,
        source_origins: origins,
        sensors,
    };
    write_json(&out.join("scene.json"), &meta)?;
    Ok(meta)
}
