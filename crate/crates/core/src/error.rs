use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid predicate name `{0}`")]
    InvalidPredicateName(String),

    #[error("predicate `{predicate}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },

    #[error("renaming is not injective: {0}")]
    NotInjective(String),

    #[error("rule cannot be normalized: {0}")]
    NotNormalizable(String),

    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("signature error: {0}")]
    Signature(String),

    #[error("padding width k={k} is below the maximum arity {max_arity}")]
    PaddingTooSmall { k: usize, max_arity: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("too large for oracle: {0}")]
    TooLarge(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("canonicalization did not make progress: {0}")]
    NoProgress(String),

    #[error("soundness violation: {0}")]
    Soundness(String),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("rule outside encoding bounds: {0}")]
    OutOfBounds(String),
}
