use std::path::PathBuf;

use crate::state::BlochVector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad input: a malformed matrix, a non-unit axis, an invalid config.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("unphysical state: |r| = {norm} exceeds 1 + {tol}")]
    Unphysical { norm: f64, tol: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e} at {best:?})")]
    Convergence {
        best: BlochVector,
        residual: f64,
        iterations: usize,
    },

    #[error("degenerate Newton step at {at:?}: singular Jacobian and no damped descent direction")]
    DegenerateStep { at: BlochVector },

    #[error("no samples remain after the transient cutoff t = {transient}; try a smaller transient")]
    EmptyPlot { transient: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 usage, 2 runtime/numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) => 1,
            Error::Unphysical { .. }
            | Error::NonFinite { .. }
            | Error::Convergence { .. }
            | Error::DegenerateStep { .. }
            | Error::EmptyPlot { .. } => 2,
            Error::Io { .. } | Error::Csv { .. } | Error::Json { .. } => 3,
        }
    }
}
