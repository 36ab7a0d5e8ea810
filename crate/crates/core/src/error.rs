use thiserror::Error;

/// Errors raised by the backends and by the space-level constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("object mismatch: expected {expected}, found {found}")]
    ObjectMismatch { expected: String, found: String },

    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),

    #[error("invalid object: {0}")]
    InvalidObject(String),

    #[error("not a state: domain is {0}, expected the monoidal unit")]
    NotAState(String),

    #[error("state not preserved: {0}")]
    NotStatePreserving(String),

    #[error("not almost surely deterministic: {0}")]
    NotDeterministic(String),

    #[error("square does not commute: {0}")]
    NotCommuting(String),

    #[error("not independent: {0}")]
    NotIndependent(String),

    #[error("not invariant: {0}")]
    NotInvariant(String),

    #[error("not measure-preserving: {0}")]
    NotMeasurePreserving(String),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn mismatch(expected: impl std::fmt::Debug, found: impl std::fmt::Debug) -> Self {
        Error::ObjectMismatch {
            expected: format!("{expected:?}"),
            found: format!("{found:?}"),
        }
    }

    /// Short machine-readable code, used by the workbench reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ObjectMismatch { .. } => "object_mismatch",
            Error::InvalidMorphism(_) => "invalid_morphism",
            Error::InvalidObject(_) => "invalid_object",
            Error::NotAState(_) => "not_a_state",
            Error::NotStatePreserving(_) => "not_state_preserving",
            Error::NotDeterministic(_) => "not_deterministic",
            Error::NotCommuting(_) => "not_commuting",
            Error::NotIndependent(_) => "not_independent",
            Error::NotInvariant(_) => "not_invariant",
            Error::NotMeasurePreserving(_) => "not_measure_preserving",
            Error::Inconsistent(_) => "inconsistent",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
