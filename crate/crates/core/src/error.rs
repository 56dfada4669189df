use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the engine can report. Each variant maps to one CLI exit code.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("malformed piece: {0}")]
    Structural(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("query model violation: {0}")]
    ModelViolation(String),
    #[error("illegal protocol output: {0}")]
    IllegalOutput(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("query budget exhausted after {0} queries")]
    BudgetExhausted(usize),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code: 2 parse, 3 precondition, 4 model violation, 5 certification.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) => 2,
            Error::ModelViolation(_) | Error::IllegalOutput(_) => 4,
            Error::Certification(_) => 5,
            Error::Domain(_)
            | Error::Structural(_)
            | Error::Arity { .. }
            | Error::Precondition(_)
            | Error::Infeasible(_)
            | Error::BudgetExhausted(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
