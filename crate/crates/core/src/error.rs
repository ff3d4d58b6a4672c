//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Error`]; the CLI maps
//! each variant class to a distinct process exit code.

use thiserror::Error;

/// Errors produced by configuration validation, solvers, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration field failed validation. Always names the offending
    /// field so CLI users can fix the config file directly.
    #[error("invalid config: field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    /// The interior-point solver hit its iteration cap (or stalled) before
    /// reaching the requested tolerances. Carries the best iterate found so
    /// callers can inspect or reuse it.
    #[error(
        "SDR solver did not converge after {iterations} iterations \
         (relative duality gap {gap:.3e})"
    )]
    SolverNotConverged {
        iterations: usize,
        /// Relative duality gap of the best iterate.
        gap: f64,
        /// Best iterate found, by worst-case residual.
        best: Box<crate::grouping::SdrSolution>,
    },

    /// Exhaustive search was requested on an instance whose assignment space
    /// exceeds the supported bound.
    #[error(
        "brute-force search space (C+1)^K = {search_space:.3e} exceeds the \
         supported limit {limit:.1e}"
    )]
    InstanceTooLarge { search_space: f64, limit: f64 },

    /// The bandwidth LP has no feasible γ (some minimum rate cannot be met).
    #[error("bandwidth allocation infeasible: {reason}")]
    Infeasible { reason: String },

    /// A scheduled group does not fit inside the coherence interval.
    #[error(
        "group of {group_size} users exceeds the coherence interval of \
         {coherence_length} samples"
    )]
    GroupTooLarge {
        group_size: usize,
        coherence_length: usize,
    },

    /// Malformed instance data (weight matrix or rate table) supplied by a
    /// caller or read from a CSV file.
    #[error("invalid instance data: {0}")]
    InvalidInstance(String),

    /// Failure reading or writing files.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
