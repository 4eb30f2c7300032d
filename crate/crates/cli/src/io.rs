use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use voxsep::signal::{load_wav, write_atomic};
use voxsep::MonoSignal;

use crate::error::{CliError, CliResult};

/// Name and content hash of an input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> CliResult<InputDigest> {
    let bytes = std::fs::read(path).map_err(|_| voxsep::Error::WavNotFound(path.into()))?;
    Ok(InputDigest {
        name: file_name(path),
        sha256: sha256_hex(&bytes),
    })
}

pub fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "signal".into())
}

/// A decoded channel with the identifier used in reports.
#[derive(Debug, Clone)]
pub struct NamedSignal {
    pub id: String,
    pub signal: MonoSignal,
}

/// Load WAV files, splitting multi-channel files into `<stem>_ch<k>` signals.
pub fn load_signals(paths: &[PathBuf]) -> CliResult<(Vec<NamedSignal>, Vec<InputDigest>)> {
    let mut signals = Vec::new();
    let mut digests = Vec::new();
    for path in paths {
        digests.push(digest_file(path)?);
        let channels = load_wav(path)?;
        let stem = file_stem(path);
        let multi = channels.len() > 1;
        for (c, signal) in channels.into_iter().enumerate() {
            let id = if multi {
                format!("{stem}_ch{}", c + 1)
            } else {
                stem.clone()
            };
            signals.push(NamedSignal { id, signal });
        }
    }
    Ok((signals, digests))
}

pub fn load_mono(path: &Path) -> CliResult<MonoSignal> {
    let mut channels = load_wav(path)?;
    if channels.len() != 1 {
        return Err(CliError::Data(format!(
            "{} has {} channels, expected mono",
            path.display(),
            channels.len()
        )));
    }
    Ok(channels.remove(0))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| {
        CliError::Core(voxsep::Error::Write {
            path: dir.into(),
            source,
        })
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    write_atomic(path, bytes)?;
    Ok(())
}
