use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid config: {field}: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("{what}: argument {value} outside MGF domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "quadrature did not converge on [{lower}, {upper}]: estimate {estimate:e}, \
         error {error:e} above tolerance {tolerance:e}"
    )]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("{}: schema mismatch, missing columns: {}", path.display(), missing.join(", "))]
    Schema { path: PathBuf, missing: Vec<String> },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(what: &'static str, value: f64, domain: impl Into<String>) -> Self {
        Error::Domain {
            what,
            value,
            domain: domain.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
