//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by sizing, splitting, simulation, and config handling.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument violated a precondition (domain error).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A per-metric computation failed; carries the offending metric's label.
    #[error("metric '{label}': {source}")]
    Metric {
        label: String,
        #[source]
        source: Box<Error>,
    },

    /// A config document was malformed or violated a design invariant.
    /// `path` names the offending field, e.g. `metrics[0].prevalence`.
    #[error("config error at {path}: {reason}")]
    Config { path: String, reason: String },

    /// An I/O failure while reading a config or writing a report.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Attach a metric label to an error bubbling out of a per-metric computation.
    pub(crate) fn for_metric(self, label: impl Into<String>) -> Self {
        Error::Metric {
            label: label.into(),
            source: Box::new(self),
        }
    }

    /// True for input/validation errors (CLI exit code 2 territory);
    /// computation errors map to exit code 1.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}
