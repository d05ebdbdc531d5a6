use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read game file: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed game file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid game: {0}")]
    Validation(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("action {action} has zero probability under the current belief and strategy")]
    ZeroProbabilityAction { action: usize },

    #[error("strategy error: {0}")]
    Strategy(String),

    #[error("linear program is {0}")]
    LpStatus(crate::lp::LpStatus),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Numerical problems map to a distinct CLI exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::LpStatus(_) | Error::ZeroProbabilityAction { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
