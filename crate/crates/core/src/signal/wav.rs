use std::io::{Cursor, Read, Seek};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::MonoSignal;
use crate::error::{Error, Result};

const PCM16_SCALE: f64 = 32768.0;

/// Read a PCM WAV file (16-bit integer or 32-bit float), one signal per channel.
pub fn load_wav(path: impl AsRef<Path>) -> Result<Vec<MonoSignal>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::WavNotFound(path.to_path_buf()),
        _ => Error::WavMalformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        },
    })?;
    decode_from(Cursor::new(bytes), path)
}

/// Decode an in-memory WAV image.
pub fn decode_wav(bytes: &[u8]) -> Result<Vec<MonoSignal>> {
    decode_from(Cursor::new(bytes), Path::new("<memory>"))
}

fn decode_from<R: Read + Seek>(reader: R, path: &Path) -> Result<Vec<MonoSignal>> {
    let map_err = |e: hound::Error| classify(e, path);
    let mut reader = WavReader::new(reader).map_err(map_err)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::WavMalformed {
            path: path.to_path_buf(),
            reason: "zero channels".into(),
        });
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / PCM16_SCALE))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_err)?,
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_err)?,
        (fmt, bits) => {
            return Err(Error::WavUnsupported {
                path: path.to_path_buf(),
                reason: format!("{bits}-bit {fmt:?} samples"),
            })
        }
    };
    let frames = interleaved.len() / channels;
    (0..channels)
        .map(|c| {
            let samples = (0..frames).map(|i| interleaved[i * channels + c]).collect();
            MonoSignal::new(samples, spec.sample_rate)
        })
        .collect()
}

fn classify(err: hound::Error, path: &Path) -> Error {
    let path = path.to_path_buf();
    match err {
        hound::Error::Unsupported | hound::Error::TooWide | hound::Error::InvalidSampleFormat => {
            Error::WavUnsupported {
                path,
                reason: err.to_string(),
            }
        }
        other => Error::WavMalformed {
            path,
            reason: other.to_string(),
        },
    }
}

fn quantize(x: f64) -> i16 {
    let clamped = x.clamp(-1.0, 1.0 - 1.0 / PCM16_SCALE);
    (clamped * PCM16_SCALE).round() as i16
}

/// Encode a signal as a 16-bit little-endian PCM mono WAV image.
pub fn encode_wav(signal: &MonoSignal) -> Result<Vec<u8>> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut buf = Cursor::new(Vec::with_capacity(44 + 2 * signal.len()));
    let to_io = |e: hound::Error| Error::Write {
        path: "<memory>".into(),
        source: std::io::Error::other(e.to_string()),
    };
    {
        let mut writer = WavWriter::new(&mut buf, spec).map_err(to_io)?;
        let mut w16 = writer.get_i16_writer(signal.len() as u32);
        for &s in signal.samples() {
            w16.write_sample(quantize(s));
        }
        w16.flush().map_err(to_io)?;
        writer.finalize().map_err(to_io)?;
    }
    Ok(buf.into_inner())
}

/// Write a 16-bit PCM WAV. The file appears atomically (temp file + rename).
pub fn write_wav(signal: &MonoSignal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_wav(signal)?;
    write_atomic(path, &bytes)
}

/// Write bytes to `path` through a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let wrap = |source| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    let name = path
        .file_name()
        .ok_or_else(|| wrap(std::io::Error::other("path has no file name")))?;
    let tmp = path.with_file_name(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes).map_err(wrap)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        wrap(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, rate: u32, n: usize, amp: f64) -> MonoSignal {
        let s = (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin())
            .collect();
        MonoSignal::new(s, rate).unwrap()
    }

    #[test]
    fn single_full_scale_sample() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 22050,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        w.write_sample(32767i16).unwrap();
        w.finalize().unwrap();
        let sigs = load_wav(&path).unwrap();
        assert_eq!(sigs.len(), 1);
        assert_eq!(sigs[0].samples(), &[32767.0 / 32768.0]);
        assert_eq!(sigs[0].sample_rate(), 22050);
    }

    #[test]
    fn empty_data_chunk_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.wav");
        write_wav(&MonoSignal::zeros(0, 44100).unwrap(), &path).unwrap();
        let sigs = load_wav(&path).unwrap();
        assert_eq!(sigs.len(), 1);
        assert!(sigs[0].is_empty());
        assert_eq!(sigs[0].sample_rate(), 44100);
    }

    #[test]
    fn clamps_out_of_range_samples() {
        let sig = MonoSignal::new(vec![2.0, -2.0, 1.0, -1.0], 8000).unwrap();
        let back = decode_wav(&encode_wav(&sig).unwrap()).unwrap();
        assert_eq!(
            back[0].samples(),
            &[32767.0 / 32768.0, -1.0, 32767.0 / 32768.0, -1.0]
        );
    }

    #[test]
    fn sine_round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sine.wav");
        let sig = tone(440.0, 44100, 44100, 0.9);
        write_wav(&sig, &path).unwrap();
        let back = load_wav(&path).unwrap().remove(0);
        assert_eq!(back.len(), sig.len());
        for (a, b) in sig.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn multichannel_and_float_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stereo.wav");
        let spec = WavSpec {
            channels: 2,
            sample_rate: 16000,
            bits_per_sample: 32,
            sample_format: SampleFormat::Float,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        for i in 0..10 {
            w.write_sample(i as f32 * 0.01).unwrap();
            w.write_sample(-(i as f32) * 0.02).unwrap();
        }
        w.finalize().unwrap();
        let sigs = load_wav(&path).unwrap();
        assert_eq!(sigs.len(), 2);
        assert!((sigs[0].samples()[3] - 0.03).abs() < 1e-7);
        assert!((sigs[1].samples()[3] + 0.06).abs() < 1e-7);
    }

    #[test]
    fn distinct_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_wav(dir.path().join("nope.wav")),
            Err(Error::WavNotFound(_))
        ));

        let bad = dir.path().join("bad.wav");
        std::fs::write(&bad, b"RIFX not a wav file at all").unwrap();
        assert!(matches!(load_wav(&bad), Err(Error::WavMalformed { .. })));

        let eight = dir.path().join("eight.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 8,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&eight, spec).unwrap();
        w.write_sample(3i8).unwrap();
        w.finalize().unwrap();
        assert!(matches!(
            load_wav(&eight),
            Err(Error::WavUnsupported { .. })
        ));

        let sig = MonoSignal::zeros(4, 8000).unwrap();
        assert!(matches!(
            write_wav(&sig, dir.path().join("missing/dir/x.wav")),
            Err(Error::Write { .. })
        ));
    }

    #[test]
    fn header_is_canonical_pcm16() {
        let sig = MonoSignal::new(vec![0.5, -0.5], 44100).unwrap();
        let bytes = encode_wav(&sig).unwrap();
        assert_eq!(&bytes[0..4], b"RIFF");
        assert_eq!(&bytes[8..12], b"WAVE");
        assert_eq!(bytes.len(), 44 + 4);
        assert_eq!(&bytes[44..], &[0x00, 0x40, 0x00, 0xC0]);
    }
}
