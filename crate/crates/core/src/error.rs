use std::path::PathBuf;

use thiserror::Error;

use crate::decomposition::Violation;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("expected {expected} distributions to match the prior, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("probabilities do not sum to 1 (sum = {0})")]
    NotNormalized(f64),

    #[error("invalid probability {value} at index {index}")]
    InvalidProbability { index: usize, value: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("KL divergence undefined: q[{index}] = 0 but p[{index}] = {p} > 0")]
    Support { index: usize, p: f64 },

    #[error("feature index {index} out of range for dimension {dim}")]
    FeatureOutOfRange { index: usize, dim: usize },

    #[error("enumeration guard exceeded: dimension {dim} > {limit}")]
    EnumerationGuard { dim: usize, limit: usize },

    #[error("invalid tree: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidTree(Vec<Violation>),

    #[error("node {0} is a leaf")]
    LeafNode(usize),

    #[error("node {0} has an empty branch")]
    EmptyBranch(usize),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("merge of a tree with itself (index {0})")]
    SelfMerge(usize),

    #[error("empty candidate list")]
    EmptyCandidates,

    #[error("need at least {needed} classes, found {found}")]
    TooFewClasses { needed: usize, found: usize },

    #[error("training error: {0}")]
    Training(String),

    #[error("class {0} has no samples")]
    EmptyClass(usize),

    #[error("class {class} has {count} samples, fewer than {folds} folds")]
    Stratification { class: usize, count: usize, folds: usize },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
