use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("P must be prime (got {0})")]
    NotPrime(u32),

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("residue {value} out of range for modulus {p}")]
    ResidueOutOfRange { value: u32, p: u32 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: u64, len: u64 },

    #[error("enumeration of {requested} nodes exceeds the cap of {cap}")]
    CapExceeded { requested: u128, cap: u64 },

    #[error("activation table: {0}")]
    InvalidActivation(String),

    #[error("empty input")]
    Empty,

    #[error("cannot sample from a zero vector")]
    ZeroNorm,

    #[error("degenerate target: all weights vanish")]
    DegenerateTarget,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("factorization failed: matrix not positive definite")]
    Factorization,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
