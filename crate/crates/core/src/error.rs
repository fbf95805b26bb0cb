use thiserror::Error;

/// Every failure mode surfaced by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid-beta: {0}")]
    InvalidBeta(String),
    #[error("precision-exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("invalid-input: {0}")]
    InvalidInput(String),
    #[error("not-admissible: {0}")]
    NotAdmissible(String),
    #[error("cap-exceeded: {0}")]
    CapExceeded(String),
    #[error("probe-exhausted: {0}")]
    ProbeExhausted(String),
    #[error("precondition-violated: {0}")]
    PreconditionViolated(String),
    #[error("search-exhausted: {0}")]
    SearchExhausted(String),
    #[error("no-valid-n-prime: {0}")]
    NoValidNPrime(String),
    #[error("child-explosion: {0}")]
    ChildExplosion(String),
    #[error("resolution-exceeded: {0}")]
    ResolutionExceeded(String),
    #[error("invariant-violation: {0}")]
    Invariant(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit code used by the command-line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidBeta(_)
            | Error::InvalidInput(_)
            | Error::NotAdmissible(_)
            | Error::PreconditionViolated(_)
            | Error::ResolutionExceeded(_)
            | Error::Io(_) => 2,
            Error::CapExceeded(_)
            | Error::PrecisionExhausted(_)
            | Error::ProbeExhausted(_)
            | Error::ChildExplosion(_)
            | Error::SearchExhausted(_) => 3,
            Error::NoValidNPrime(_) => 4,
            Error::Invariant(_) => 5,
        }
    }
}
