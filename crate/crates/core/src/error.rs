use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("duplicate manifest path: {0}")]
    DuplicatePath(String),
    #[error("bad label {value:?} (expected 1..=10 or empty)")]
    BadLabel { value: String },
    #[error("empty manifest: {0}")]
    EmptyManifest(PathBuf),
    #[error("{path}: missing column {column}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("{path}: cell {value:?} at row {row} is not a number")]
    BadNumber {
        path: PathBuf,
        row: usize,
        value: String,
    },
    #[error("empty trial file: {0}")]
    EmptyFile(PathBuf),
    #[error("trial {trial}: coordinate {coordinate} is {fraction:.3} missing (cap {cap})")]
    TooManyMissing {
        trial: String,
        coordinate: String,
        fraction: f64,
        cap: f64,
    },
    #[error("trial {trial}: coordinate {coordinate} has no valid sample")]
    AllMissing { trial: String, coordinate: String },
    #[error("invalid marker schema: {0}")]
    BadSchema(String),
    #[error("unknown marker {0}")]
    UnknownMarker(String),
    #[error("stream too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("need at least two classes")]
    SingleClass,
    #[error("need at least two subjects")]
    SingleSubject,
    #[error("no training data")]
    EmptyData,
    #[error("feature target {target} exceeds the {available} available features")]
    TargetTooLarge { target: usize, available: usize },
    #[error("too few trials: {found} < {needed}")]
    TooFewTrials { found: usize, needed: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("trial {0} is unlabeled")]
    Unlabeled(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, err: csv::Error) -> Self {
        let path = path.into();
        match err.into_kind() {
            csv::ErrorKind::Io(source) => Error::io(path, source),
            other => Error::Csv {
                path,
                message: format!("{other:?}"),
            },
        }
    }

    /// Process exit code: 3 for filesystem failures, 4 for everything the
    /// pipeline itself rejects.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingFile(_) | Error::Io { .. } => 3,
            _ => 4,
        }
    }
}
