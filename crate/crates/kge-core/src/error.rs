//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Which slot of a triple an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriplePosition {
    Subject,
    Predicate,
    Object,
}

impl std::fmt::Display for TriplePosition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TriplePosition::Subject => write!(f, "subject"),
            TriplePosition::Predicate => write!(f, "predicate"),
            TriplePosition::Object => write!(f, "object"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty {position} label")]
    EmptyLabel { position: TriplePosition },

    #[error("{position} label contains a tab or newline, which the TSV store cannot represent")]
    UnstorableLabel { position: TriplePosition },

    #[error("{kind} id {id} out of range (count {count})")]
    IdOutOfRange {
        kind: &'static str,
        id: usize,
        count: usize,
    },

    #[error("split ratios must be positive and sum to 1 (got {ratios:?})")]
    InvalidSplitRatios { ratios: (f64, f64, f64) },

    #[error("{path}:{line}: expected {expected} tab-separated columns, found {found}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}:{line}: {message}")]
    InvalidRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("mapping rule {rule} references column {column:?}, which is not in the header")]
    UnknownColumn { rule: usize, column: String },

    #[error("table is not rectangular: row {row} has {found} cells, header has {expected}")]
    RaggedTable {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("unknown domain label {domain:?} for user {user:?}; add it to the domain list in the credibility config")]
    UnknownDomain { user: String, domain: String },

    #[error("user {user:?}: {message}")]
    InvalidUserRecord { user: String, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training diverged at epoch {epoch}: {message}")]
    Diverged { epoch: usize, message: String },

    #[error("checkpoint at {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },

    #[error("calibration requires both classes; got only {0}")]
    SingleClass(&'static str),

    #[error("unknown {kind} label {label:?}")]
    UnknownLabel { kind: &'static str, label: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
