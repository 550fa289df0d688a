use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("header is missing mapped column `{0}`")]
    MissingColumn(String),

    #[error("zero valid rows")]
    NoValidRows,

    #[error("constant column `{0}`: standard deviation is zero")]
    ConstantColumn(String),

    #[error("apply_weights: {0}")]
    InvalidWeights(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("perplexity unreachable for row {row}: all distances are zero")]
    PerplexityUnreachable { row: usize },

    #[error("non-finite coordinate at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("class {class} has {count} members, fewer than the {required} required")]
    InsufficientClass {
        class: usize,
        count: usize,
        required: usize,
    },

    #[error("degenerate bounding box: all points coincide")]
    DegenerateBoundingBox,

    #[error("missing {0} artifact")]
    MissingArtifact(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse failure category, mapped to the process exit code by the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numeric,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Usage => 1,
            ErrorClass::Data => 2,
            ErrorClass::Numeric => 3,
        }
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Stage { source, .. } => source.class(),
            Error::InvalidConfig(_) => ErrorClass::Usage,
            Error::PerplexityUnreachable { .. } | Error::NonFinite { .. } => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }
}
