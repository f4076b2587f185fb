use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("column {0:?} not found")]
    MissingColumn(String),

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    ParseCell { row: usize, column: String, value: String },

    #[error("row {row}, column {column:?}: missing value")]
    MissingCell { row: usize, column: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset contains a single class ({positives} positive, {negatives} negative)")]
    SingleClass { positives: usize, negatives: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("{what}: need at least {needed}, have {available}")]
    TooFew {
        what: String,
        needed: usize,
        available: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("config: {0}")]
    Config(String),

    #[error("fixture: {0}")]
    Fixture(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn too_few(what: impl Into<String>, needed: usize, available: usize) -> Self {
        Error::TooFew {
            what: what.into(),
            needed,
            available,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through any context annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self.root(), Error::Config(_))
    }

    pub fn is_invariant(&self) -> bool {
        matches!(self.root(), Error::Invariant(_))
    }
}
