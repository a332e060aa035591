use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{predicate}` takes {expected} arguments, got {found}")]
    Arity { predicate: String, expected: usize, found: usize },
    #[error("type mismatch: {0}")]
    Type(String),
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("query predicate `{found}` does not match target `{expected}`")]
    PredicateMismatch { expected: String, found: String },
    #[error("variable {0} is already bound to a different constant")]
    Rebind(u32),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no examples")]
    NoExamples,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

pub type Result<T> = core::result::Result<T, Error>;
