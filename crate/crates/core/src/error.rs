use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the set where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is invalid. `key` names the offending entry.
    #[error("invalid configuration at `{key}`: {message}")]
    Config { key: String, message: String },

    /// The discrete solution left its admissible set during a run.
    #[error("integrity error on road `{road}`, cell {cell}, t = {time:.6e}: {message}")]
    Integrity {
        road: String,
        cell: usize,
        time: f64,
        message: String,
    },

    /// An iterative method failed to converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("unknown scenario preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
