use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("probability out of [0, 1]: {0}")]
    InvalidProbability(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("trajectory enumeration exceeded cap of {0}")]
    CapExceeded(usize),

    #[error("instant moves escape the barrier from ({0}, {1})")]
    BarrierEscape(i64, i64),

    #[error("parameters do not fit identity {0}")]
    ParamMismatch(String),

    #[error("empty parameter grid")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
