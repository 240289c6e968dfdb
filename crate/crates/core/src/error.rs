use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("dual norm vanishes for a nonzero normal vector")]
    DegenerateDirection,
    #[error("regime violation: {0}")]
    RegimeViolation(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::InvalidSpec(_) | Error::DegenerateDirection => 2,
            Error::RegimeViolation(_) => 3,
            Error::Infeasible(_) | Error::Unbounded => 4,
            Error::ResourceLimit(_) => 5,
            Error::NumericalFailure(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
