use thiserror::Error;

/// Errors raised by the series, spectral and control routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A document or literal could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Two irrational parts with different tags were combined.
    #[error("cannot combine irrational tags `{left}` and `{right}`")]
    TagMismatch { left: String, right: String },

    /// The requested mode has zero actuator overlap and a nonzero gap to close.
    #[error("mode {mode} is blocked by actuator {actuator} (overlap is exactly zero, uncorrectable gap {gap:e})")]
    BlockedMode {
        mode: usize,
        actuator: String,
        gap: f64,
    },

    /// A linear solve was too inaccurate to be trusted.
    #[error("ill-conditioned system: residual {residual:e} exceeds {threshold:e}; add regularization or drop modes")]
    Conditioning { residual: f64, threshold: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// True for failures of the mathematical problem itself rather than of its input.
    pub fn is_domain_error(&self) -> bool {
        matches!(self, Error::BlockedMode { .. } | Error::Conditioning { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
