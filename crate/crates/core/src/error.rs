use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A radial integral that does not exist (small- or large-r divergence).
    #[error("radial integral diverges: {0}")]
    ConvergenceViolation(String),

    /// Quadrature could not reach the requested tolerance.
    #[error("tolerance {requested:e} not reached (estimate {value:e}, error {error:e})")]
    ToleranceNotReached {
        requested: f64,
        value: f64,
        error: f64,
    },

    /// The truncated partial-wave series did not meet its tail criterion.
    #[error(
        "series tail {tail_estimate:e} above tolerance {requested:e} at l_max = {l_max} (partial sum {partial_sum:e})"
    )]
    TailToleranceNotMet {
        requested: f64,
        partial_sum: f64,
        tail_estimate: f64,
        l_max: u32,
    },

    #[error("division domain: {0}")]
    DivisionDomain(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors that stem from numerical tolerances rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ToleranceNotReached { .. } | Error::TailToleranceNotMet { .. }
        )
    }
}
