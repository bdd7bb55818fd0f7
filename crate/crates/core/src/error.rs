use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("not an endomorphism: {0}")]
    NotEndomorphism(String),

    #[error("invalid cellular automaton: {0}")]
    InvalidAutomaton(String),

    #[error("invalid tower at level {level}: {reason}")]
    InvalidTower { level: usize, reason: String },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// Budget ran out; `partial` holds the rank sequence computed so far.
    #[error("resource limit exceeded after {} trajectory steps", partial.len())]
    ResourceLimit { partial: Vec<usize> },
}

pub type Result<T> = std::result::Result<T, Error>;
