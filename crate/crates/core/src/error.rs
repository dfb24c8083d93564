use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    Domain(String),

    #[error("not in general position: {0}")]
    GeneralPosition(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("search exhausted: {0}")]
    Exhausted(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Mesh(_) => 2,
            Error::GeneralPosition(_) | Error::Exhausted(_) => 3,
            Error::Verification(_) | Error::Domain(_) => 4,
            Error::Io(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
