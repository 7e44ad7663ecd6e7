use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid permutation: {0}")]
    Permutation(String),

    #[error("invalid observable: {0}")]
    Observable(String),

    #[error("invalid coupling: {0}")]
    Coupling(String),

    #[error("margin mismatch: {0}")]
    MarginMismatch(String),

    #[error("not a bijection: {0}")]
    NotBijection(String),

    /// A stated hypothesis of a construction does not hold; the message names
    /// the inequality that failed.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("symbol {symbol} never occurs; restrict the alphabet to the essential range first")]
    UnusedSymbol { symbol: usize },

    #[error("no good observable after {attempts} attempts: {detail}")]
    GoodObservableExhausted { attempts: usize, detail: String },

    #[error("config line {line}: field `{field}`: {message}")]
    Config {
        line: usize,
        field: String,
        message: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
