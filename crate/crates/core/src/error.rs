use std::path::PathBuf;

use crate::sim::Trace;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the domain of a mathematical operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// The time-base-generator gain was requested at or past its singularity.
    #[error("gain singularity: elapsed time {elapsed} is not below the deadline {tc}")]
    Singularity { elapsed: f64, tc: f64 },

    /// A bound evaluated to a non-positive or non-finite value.
    #[error("invalid bound: {0}")]
    InvalidBound(String),

    /// Inconsistent or missing configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The simulated state left the finite region; carries what was recorded so far.
    #[error("run diverged at t = {at}")]
    Diverged { at: f64, partial: Box<Trace> },

    /// Traces handed to the plot emitter cannot share one figure.
    #[error("layout error: {0}")]
    Layout(String),

    #[error("parse error at {location}: {detail}")]
    Parse { location: String, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
