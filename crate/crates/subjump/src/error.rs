//! Crate-wide error type.
//!
//! Numerical routines distinguish *domain* misuse (caller bugs: a negative
//! abscissa, a zero denominator) from *convergence* failures (a series or
//! quadrature that could not reach its tolerance — these carry the achieved
//! bound so callers can decide whether the partial answer is usable) and from
//! *unsupported* operations (asking a non-Lévy tail for subordinator-only
//! functionals).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is undefined for this tail model (e.g. total-value
    /// functionals of a tail whose small-jump integral diverges).
    #[error("unsupported for this tail model: {0}")]
    Unsupported(String),

    /// The jump series could not be truncated within the configured bounds.
    #[error(
        "series truncation failed after {terms} terms: \
         remainder bound {achieved:.3e} > target {target:.3e}"
    )]
    Truncation {
        achieved: f64,
        target: f64,
        terms: usize,
    },

    /// Adaptive quadrature stopped before reaching its tolerance.
    #[error("quadrature did not converge: error estimate {achieved:.3e} > target {target:.3e}")]
    Quadrature { achieved: f64, target: f64 },

    /// An injected spacing stream ran out before the series rule was met.
    #[error("injected spacing stream exhausted after {0} values")]
    SpacingsExhausted(usize),

    /// The model has no declared limit regime for the requested theorem.
    #[error("no limit regime is known for this model{0}; declare one with --regime")]
    RegimeUnknown(String),

    /// A model-spec string failed to parse.
    #[error("invalid model spec: {0}")]
    ModelSpec(String),

    /// A run-config file or key failed to parse.
    #[error("invalid config: {0}")]
    Config(String),

    /// A tail-table file failed to parse or validate.
    #[error("invalid tail table: {0}")]
    Table(String),

    /// Experiment-level statistical check failed in a way that is operational
    /// rather than statistical (e.g. too many truncation failures).
    #[error("experiment error: {0}")]
    Experiment(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: operational failures are all `2`;
    /// statistical verdicts are handled separately by the caller.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
