use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("non-numeric value {value:?} in column `{column}` on data line {line}")]
    NonNumeric {
        column: String,
        value: String,
        line: usize,
    },

    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("splitting on `{column}` at {threshold} leaves the {side} set empty")]
    EmptySplit {
        column: String,
        threshold: f64,
        side: &'static str,
    },

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("target has zero variance")]
    ZeroVariance,

    #[error("empty input")]
    EmptyInput,

    #[error("non-finite input value")]
    NonFinite,

    #[error("no row with id {0}")]
    UnknownRow(u64),

    #[error("duplicate row id {0}")]
    DuplicateRowId(u64),

    #[error("row {0} is a reasonable prediction, not a large error")]
    NotLargeError(u64),

    #[error("no reasonable predictions to derive feature fences from")]
    EmptyReasonableSet,

    #[error("insufficient evidence: {accepted} accepted samples, need at least {required}")]
    InsufficientStratum { accepted: usize, required: usize },

    #[error("instance {instance_id}: insufficient evidence, every feature stratum is below the minimum size")]
    Unexplainable { instance_id: u64 },

    #[error("explanations disagree on feature count ({0} vs {1})")]
    MixedFeatureCounts(usize, usize),

    #[error("model document: {0}")]
    ModelFormat(String),

    #[error("predictor: {0}")]
    Predictor(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
