use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("structural error: {0}")]
    Structural(String),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("index-kind mismatch: {0}")]
    IndexKind(String),
    #[error("duplicate momentum assignment `{0}`")]
    DuplicateMomentum(String),
    #[error("no fields declared")]
    NoFields,
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("non-involutive set is not second-class-complete: {0}")]
    Singular(String),
    #[error("integrability loop did not terminate within {0} generations")]
    NonTermination(usize),
    #[error("no relation at this ansatz degree for {0}")]
    NoRelation(String),
    #[error("algebra does not close: {0}")]
    NotClosed(String),
    #[error("oracle failure: {0}")]
    Oracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;
