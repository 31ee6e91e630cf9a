use std::path::PathBuf;

use thiserror::Error;

/// A syntax or range error in network or output-set text, with its 1-based
/// line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: unsupported checkpoint format version {found} (expected {expected})")]
    Version {
        path: PathBuf,
        found: u32,
        expected: u32,
    },
    #[error("{path}: checkpoint is for {field}={found}, expected {expected}")]
    Mismatch {
        path: PathBuf,
        field: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("{path}: checksum mismatch (recorded {recorded:016x}, computed {computed:016x})")]
    Checksum {
        path: PathBuf,
        recorded: u64,
        computed: u64,
    },
    #[error("{path}: truncated checkpoint: {detail}")]
    Truncated { path: PathBuf, detail: String },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{path}: entry {index}: {detail}")]
    Corrupt {
        path: PathBuf,
        index: usize,
        detail: String,
    },
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("candidate pool exceeded the limit of {limit} entries at depth {depth}")]
    PoolLimit { depth: usize, limit: usize },
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("worker pool: {0}")]
    Workers(String),
}

/// Refusal by a brute-force oracle to run outside its feasible range.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("oracle refuses {what}: {reason}")]
pub struct OracleError {
    pub what: &'static str,
    pub reason: String,
}
