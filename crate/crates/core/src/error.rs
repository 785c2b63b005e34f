use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("angle difference is {steps:.3} grid steps, more than 0.25 from the nearest step")]
    GridMismatch { steps: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("orbit is degenerate (norm {norm:.3e} below 1e-6)")]
    DegenerateOrbit { norm: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("non-finite gradient in parameter tensor `{tensor}`")]
    NonFiniteGradient { tensor: String },

    #[error("non-finite loss at iteration {iter}")]
    NonFiniteLoss {
        iter: u64,
        snapshot: Box<crate::model::ModelParams>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }

    /// True for failures caused by numbers going bad rather than bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteGradient { .. } | Error::NonFiniteLoss { .. } | Error::DegenerateOrbit { .. }
        )
    }
}
