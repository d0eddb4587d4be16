use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("scalar {0} is outside the supported range (|v| < 2^40)")]
    ScalarOutOfRange(i128),

    #[error("unknown instance distribution `{0}`")]
    UnknownDistribution(String),

    #[error("instance size must be at least 1")]
    EmptyInstance,

    #[error("invalid k-LDT instance: {0}")]
    InvalidKLdt(String),

    #[error("block size {g} out of range (expected 1..={max})")]
    BlockSizeOutOfRange { g: usize, max: usize },

    #[error("sign test on a form with no variable terms")]
    EmptyForm,

    #[error("128-bit overflow while evaluating a linear form")]
    Overflow,

    #[error("difference order has no rank for group {0}")]
    MissingRank(usize),

    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("permutation enumeration refused for g = {0} (only g <= 2)")]
    PermutationBlowup(usize),

    #[error("box ({i}, {j}) fired {fired} tuples for group {k}, expected exactly one")]
    Distinctness { i: usize, j: usize, k: usize, fired: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance file: {0}")]
    Format(String),
}
