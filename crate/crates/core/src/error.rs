use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Input and precondition failures are distinct from "verified failure"
/// outcomes (a certificate that fails, an orbit that misses its target):
/// those are reported as data, never as `Err`.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("point {point} is outside the domain (value is +inf)")]
    Domain { point: usize },

    #[error("function is improper: no point has a finite value")]
    Improper,

    #[error("precondition violated: {reason}")]
    Precondition { reason: String, witness: Option<usize> },

    #[error("empty subdifferential")]
    EmptySubdifferential,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("subdifferential oracle undefined at point {point}")]
    Coverage { point: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("hypothesis check failed ({which}) at point {point}: margin {margin:e}")]
    Hypothesis {
        which: String,
        point: usize,
        other: Option<usize>,
        margin: f64,
    },

    #[error("hypothesis-scale mismatch: {0}")]
    Scale(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn precondition(reason: impl Into<String>, witness: Option<usize>) -> Self {
        Error::Precondition {
            reason: reason.into(),
            witness,
        }
    }
}
