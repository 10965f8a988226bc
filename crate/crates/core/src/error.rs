use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index must be a positive integer, got 0")]
    ZeroIndex,

    #[error("capacity exceeded: {what} is {got}, limit is {max}")]
    Capacity {
        what: &'static str,
        got: usize,
        max: usize,
    },

    #[error("function must have zero mean, residual mean is {0}")]
    NonzeroMean(String),

    #[error("exponent p = {0} is not allowed here")]
    InvalidExponent(f64),

    #[error("symbol vanishes at origin; dual undefined")]
    SymbolVanishesAtOrigin,

    #[error("insufficient dual depth: need {need} coefficients, have {have}")]
    InsufficientDualDepth { need: usize, have: usize },

    #[error("zero polynomial has no well-defined roots")]
    ZeroPolynomial,

    #[error("multi-index of length {len} is too long for a level-{level} function")]
    IndexTooDeep { len: usize, level: u32 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("operation is float-only: {0}")]
    FloatOnly(String),

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
