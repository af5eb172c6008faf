use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("type error: {0}")]
    Type(String),
    /// Missing parameter values or seed when building a diagram.
    #[error("{0}")]
    Usage(String),
}

impl DslError {
    pub fn exit_code(&self) -> i32 {
        match self {
            DslError::Syntax { .. } => 1,
            DslError::Type(_) => 2,
            DslError::Usage(_) => 64,
        }
    }
}

pub type Result<T, E = DslError> = std::result::Result<T, E>;

pub(crate) fn type_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(DslError::Type(msg.into()))
}
