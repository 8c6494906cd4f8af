use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// The bond set of a node cannot determine all polynomial coefficients.
    #[error("unisolvency failure at node {node}: {reason}")]
    Unisolvency { node: usize, reason: String },

    #[error("missing value for node {node}: {what}")]
    MissingValue { node: usize, what: &'static str },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error(
        "solver did not converge after {iterations} iterations (relative residual {residual:.3e})"
    )]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    /// A verification run completed but missed its tolerance.
    #[error("{what}: {value:.3e} exceeds tolerance {tolerance:.1e}")]
    CheckFailed {
        what: String,
        value: f64,
        tolerance: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures (as opposed to bad input) map to exit code 2 in the CLI.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Unisolvency { .. }
                | Error::SingularSystem(_)
                | Error::NotConverged { .. }
                | Error::CheckFailed { .. }
        )
    }

    /// Short stable tag for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Parse { .. } => "parse",
            Error::Config { .. } => "config",
            Error::Unsupported(_) => "unsupported",
            Error::Unisolvency { .. } => "unisolvency",
            Error::MissingValue { .. } => "missing-value",
            Error::SingularSystem(_) => "singular-system",
            Error::NotConverged { .. } => "not-converged",
            Error::CheckFailed { .. } => "check-failed",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
