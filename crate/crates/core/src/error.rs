use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty log")]
    EmptyLog,

    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },

    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("residual cycle in process model: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    /// A size limit of an exact or brute-force routine was exceeded.
    #[error("capability limit exceeded: {0}")]
    Capability(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn is_capability(&self) -> bool {
        matches!(self, Error::Capability(_))
    }
}
