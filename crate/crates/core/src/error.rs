use std::path::PathBuf;

/// Errors surfaced by the library. Simulation instability is not an error:
/// a diverged lap is a regular [`crate::sim::LapResult`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("gain vector outside the search domain: {0}")]
    OutOfDomain(String),

    #[error("kernel matrix not positive definite after maximum jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("evaluator failed at iteration {iteration}: {message}")]
    Evaluator { iteration: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("output directory {0} is locked by another campaign")]
    Locked(PathBuf),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
