use std::path::PathBuf;

use thiserror::Error;

/// Every failure the benchmark engine can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: PathBuf, reason: String },

    #[error("non-finite value at row {row}, column {column}")]
    NonFiniteValue { row: usize, column: usize },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("series too short: need at least {needed} points, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("cannot place anomaly regions: {0}")]
    RegionOverflow(String),

    #[error("invalid anomaly spec: {0}")]
    InvalidAnomalySpec(String),

    #[error("unknown detector kind `{0}`")]
    UnknownKind(String),

    #[error("invalid hyperparameter `{name}`: {reason}")]
    InvalidHyperparam { name: String, reason: String },

    #[error("insufficient training data: need {needed} rows, got {got}")]
    InsufficientTrainData { needed: usize, got: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("window of {window} points does not fit a segment of {len} points")]
    WindowTooLarge { window: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("ground truth contains no anomaly events")]
    NoTruthEvents,

    #[error("ground truth contains a single class")]
    SingleClassTruth,

    #[error("all paired differences are zero")]
    AllZeroDifferences,

    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    #[error("no critical-difference table entry for k = {k}, alpha = {alpha}")]
    UnsupportedK { k: usize, alpha: f64 },

    #[error("schema mismatch in {path}: {reason}")]
    SchemaMismatch { path: PathBuf, reason: String },

    #[error("manifest check failed for series `{series}`: {reason}")]
    ManifestMismatch { series: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn hyperparam(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidHyperparam {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
