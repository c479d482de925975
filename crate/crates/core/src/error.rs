use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("cycle detected at edge {0} -- {1}")]
    Cycle(String, String),
    #[error("more than one unweighted vertex (`{0}` and `{1}`)")]
    MultipleUnweighted(String, String),
    #[error("graph has no unweighted vertex")]
    NoKnot,
    #[error("graph is not connected")]
    NotConnected,
    #[error("intersection form is not negative definite")]
    NotNegativeDefinite,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("complex too large: {0} cells exceeds the limit of {1}")]
    TooManyCells(usize, usize),
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("{0}")]
    Computation(String),
}

impl Error {
    /// True for errors caused by malformed or unsupported input, as opposed
    /// to failures during a computation.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::DuplicateVertex(_)
                | Error::UnknownVertex(_)
                | Error::Cycle(..)
                | Error::MultipleUnweighted(..)
                | Error::NoKnot
                | Error::NotConnected
                | Error::Invalid(_)
        )
    }
}
