use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the signal-processing library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("WAV file not found: {0}")]
    WavNotFound(PathBuf),

    #[error("malformed WAV header in {path}: {reason}")]
    WavMalformed { path: PathBuf, reason: String },

    #[error("unsupported WAV encoding in {path}: {reason}")]
    WavUnsupported { path: PathBuf, reason: String },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("length mismatch: {left} vs {right} samples")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero variance input")]
    ZeroVariance,

    #[error("reference signal is all zeros")]
    ZeroReference,

    #[error("covariance is rank deficient (eigenvalue ratio {ratio:.3e})")]
    DegenerateCovariance { ratio: f64 },

    #[error("unknown contrast function '{0}' (expected 'logcosh' or 'gauss')")]
    UnknownContrast(String),

    #[error("too many signals for exhaustive permutation search: {0} (max 5)")]
    TooManySignals(usize),

    #[error("noise profile does not match analysis settings: {0}")]
    ProfileMismatch(String),

    #[error("no pause frames available for noise estimation")]
    EmptyPauseMask,

    #[error("signal has no voiced frames")]
    NoVoicedFrames,

    #[error("not enough data: need {needed}, have {have}")]
    InsufficientData { needed: usize, have: usize },

    #[error("zero mean contour")]
    ZeroMean,

    #[error("zero amplitude cycle")]
    ZeroAmplitude,

    #[error("zero total loudness")]
    ZeroLoudness,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable snake_case identifier, used as a reason code in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::WavNotFound(_) => "wav_not_found",
            Error::WavMalformed { .. } => "wav_malformed",
            Error::WavUnsupported { .. } => "wav_unsupported",
            Error::Write { .. } => "write_failed",
            Error::InvalidSignal(_) => "invalid_signal",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::ZeroVariance => "zero_variance",
            Error::ZeroReference => "zero_reference",
            Error::DegenerateCovariance { .. } => "degenerate_covariance",
            Error::UnknownContrast(_) => "unknown_contrast",
            Error::TooManySignals(_) => "too_many_signals",
            Error::ProfileMismatch(_) => "profile_mismatch",
            Error::EmptyPauseMask => "empty_pause_mask",
            Error::NoVoicedFrames => "no_voiced_frames",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::ZeroMean => "zero_mean",
            Error::ZeroAmplitude => "zero_amplitude",
            Error::ZeroLoudness => "zero_loudness",
        }
    }

    /// True for errors caused by the input data rather than by usage.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            Error::InvalidParameter(_) | Error::UnknownContrast(_) | Error::Write { .. }
        )
    }
}
