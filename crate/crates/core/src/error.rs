use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("full-grid dimension unsupported, use radial module (got N = {0})")]
    DimensionUnsupported(usize),

    #[error("under-resolved domain: {layers} interior layer(s), operator order {m} needs {m}")]
    UnderResolved { layers: usize, m: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("eigenvalue {index} is not simple (relative gap {gap:.3e})")]
    NotSimple { index: usize, gap: f64 },

    #[error("vanishing order not identified up to gamma = {0}")]
    OrderNotIdentified(usize),

    #[error("config error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
