use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A theorem or variant hypothesis failed; the payload names the violated relation.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("level out of range: {0}")]
    LevelOutOfRange(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-positive value: {0}")]
    NonPositive(String),

    #[error("clipped cube in family: {0}")]
    ClippedCube(String),

    #[error("unresolvable on grid: {0}")]
    Unresolvable(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::Unresolvable(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }
}
