use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulation library and the command-line frontend.
#[derive(Debug, Error)]
pub enum ScmError {
    #[error("size mismatch: expected {expected} components, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dropout probability {0} is outside [0, 1)")]
    InvalidProbability(f64),

    #[error("invalid dropout mask: {0}")]
    InvalidMask(String),

    #[error("ensemble has no members")]
    EmptyEnsemble,

    #[error("ensemble has {members} members but {weights} combination weights")]
    EnsembleWeights { members: usize, weights: usize },

    #[error("cannot split {total} hidden units into {parts} equal networks")]
    NonDivisibleSplit { total: usize, parts: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("nothing to plot")]
    EmptyPlot,

    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = ScmError> = std::result::Result<T, E>;

impl ScmError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ScmError::Io {
            path: path.into(),
            source,
        }
    }
}
