use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("count mismatch: corpus has {corpus} records, embeddings have {embeddings} rows")]
    CountMismatch { corpus: usize, embeddings: usize },

    #[error("n >= 1 violated: dataset is empty")]
    EmptyDataset,

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("matching requires rows <= cols, got {rows} x {cols}")]
    MatchingShape { rows: usize, cols: usize },

    #[error("invalid constraint reference {index} for a dataset of {n} points")]
    InvalidConstraint { index: usize, n: usize },

    #[error("oracle transport failure after {attempts} attempts: {message}")]
    OracleTransport { attempts: u32, message: String },

    #[error("oracle response could not be parsed after {attempts} attempts: {message}; raw payload: {raw}")]
    OracleParse {
        attempts: u32,
        message: String,
        raw: String,
    },

    #[error("oracle configuration: {0}")]
    OracleConfig(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
