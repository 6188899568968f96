use thiserror::Error;

/// Failures raised by the constitutive library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tensor is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotSpd { min_eigenvalue: f64 },

    #[error("{what}: argument {value} is outside the admissible domain")]
    Domain { what: String, value: f64 },

    #[error("{what}: value {value} is outside the range of the scale function")]
    Range { what: String, value: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("isochoric tensor has det {det} (expected 1)")]
    UnimodularViolation { det: f64 },

    #[error("network stretch {stretch} reached the locking limit")]
    ChainLimit { stretch: f64 },

    #[error("local Newton iteration did not converge after {iterations} iterations (|R| = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("linearized system is singular")]
    SingularK,

    #[error("data sets have mismatched lengths ({expected} vs {found})")]
    LengthMismatch { expected: usize, found: usize },

    #[error("empty data set")]
    EmptySet,

    #[error("every objective evaluation failed")]
    AllEvaluationsFailed,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("at t = {time}: {source}")]
    AtTime { time: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(what: impl Into<String>, value: f64) -> Self {
        Error::Domain { what: what.into(), value }
    }

    pub(crate) fn range(what: impl Into<String>, value: f64) -> Self {
        Error::Range { what: what.into(), value }
    }

    pub(crate) fn at(self, time: f64) -> Self {
        match self {
            Error::AtTime { .. } => self,
            other => Error::AtTime { time, source: Box::new(other) },
        }
    }

    /// The underlying error with any time stamp removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures a smaller time step may cure.
    pub fn is_step_failure(&self) -> bool {
        matches!(self.root(), Error::NoConvergence { .. } | Error::SingularK)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
