//! Crate-wide error type.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    // ----- mask analytics -----
    #[error("invalid mask: {0}")]
    InvalidMask(String),
    #[error("empty component")]
    EmptyComponent,
    #[error("point outside image")]
    PointOutsideImage,

    // ----- instruction building -----
    #[error("caption count mismatch for pair '{pair_id}': expected 5 captions, found {found}")]
    CaptionCountMismatch { pair_id: String, found: usize },
    #[error("pair '{pair_id}' is marked unchanged but its mask has changed pixels")]
    UnchangedPairWithChanges { pair_id: String },
    #[error("duplicate pair id '{0}'")]
    DuplicatePairId(String),
    #[error("invalid template bank: {0}")]
    InvalidTemplateBank(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    // ----- prompt composition -----
    #[error("empty query")]
    EmptyQuery,

    // ----- vision math -----
    #[error("tensor shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("image dimensions {width}x{height} are not divisible by {divisor}")]
    NotDivisible {
        width: usize,
        height: usize,
        divisor: usize,
    },
    #[error("tensor '{0}' contains non-finite values")]
    NonFinite(String),

    // ----- metrics -----
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("length mismatch: {left} predictions vs {right} ground truths")]
    LengthMismatch { left: usize, right: usize },

    // ----- evaluation -----
    #[error("record '{record_id}': unparseable ground truth: {reason}")]
    BadGroundTruth { record_id: String, reason: String },

    // ----- file I/O -----
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed JSON: {message}")]
    MalformedJson {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: entry {index}: {message}")]
    ManifestEntry {
        path: PathBuf,
        index: usize,
        message: String,
    },
    #[error("{path}:{line}: duplicate id '{id}'")]
    DuplicateRecordId {
        path: PathBuf,
        line: usize,
        id: String,
    },
    #[error("unknown label {0} in mask (expected 0, 1 or 2)")]
    UnknownLabel(u8),
    #[error("unsupported mask image: {0}")]
    UnsupportedMask(String),
}

impl Error {
    /// True for errors caused by the environment (missing/unreadable files)
    /// rather than by invalid data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::MissingFile(_) | Error::Io { .. })
    }
}
