use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("non-finite sample at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The stretching matrix is not positive definite for the current occupancy.
    #[error(
        "infeasible stretching: energy matrix not positive definite \
         (smallest eigenvalue ~ {smallest_eigenvalue:.6e}); reduce lambda below min cluster size / N"
    )]
    InfeasibleStretching { smallest_eigenvalue: f64 },

    #[error("cluster {cluster} is empty and could not be repaired")]
    EmptyCluster { cluster: usize },

    #[error("requested {requested} distinct initial nodes but data has only {available} distinct rows")]
    TooFewDistinctRows { requested: usize, available: usize },

    #[error("conflicting constraints at sample {index}")]
    ConflictingConstraints { index: usize },

    #[error("linear system is singular")]
    Singular,

    #[error("duplicate primitive id `{0}`")]
    DuplicateId(String),

    #[error("unknown primitive id `{0}`")]
    UnknownId(String),

    #[error("library at {0} is locked by another writer")]
    Locked(PathBuf),

    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
