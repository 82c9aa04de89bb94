use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid perturbed Bernoulli spec: {0}")]
    InvalidSpec(String),

    /// A caller-side precondition does not hold. The message names it.
    #[error("{0}")]
    Precondition(String),

    #[error("state space too large: {0}")]
    StateSpace(String),

    #[error("adversary touched clique-incident pair ({0}, {1})")]
    AdversaryContract(usize, usize),

    #[error("no unused grid points remain off the planted line")]
    NoFreePoints,

    #[error("malformed instance file: {0}")]
    Format(String),
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !($cond) {
            return Err($crate::error::precondition(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
