use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid modulus {0}: must be at least 2")]
    InvalidModulus(u64),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("modulus {0} is not prime; operation needs field division")]
    CompositeModulus(u64),
    #[error("irreducibility is undefined for constant polynomials")]
    ConstantPolynomial,

    #[error("bit width {found} outside supported range {min}..={max}")]
    WidthOutOfRange { found: u32, min: u32, max: u32 },
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("entry {value} at index {index} does not fit in {bits} bits")]
    EntryOutOfRange { index: usize, value: u64, bits: u32 },

    #[error("expected {expected} BCNs, found {found}")]
    BcnCount { expected: usize, found: usize },
    #[error("width mismatch: expected n={expected}, found n={found}")]
    WidthMismatch { expected: u32, found: u32 },
    #[error("BCN at position {position} is labelled plane {found}, expected plane {expected}")]
    PlaneOrder {
        position: usize,
        expected: u32,
        found: u32,
    },
    #[error("expected output BCNs, found an input BCN at position {0}")]
    WrongRole(usize),
    #[error("polynomial must be over GF(2), found modulus {0}")]
    NotBinary(u64),
    #[error("polynomial degree {degree} exceeds maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("probe index {index} outside [0, 2^{bits})")]
    ProbeIndexOutOfRange { index: u64, bits: u32 },
    #[error("generator returned {value} at index {index}, outside [0, 2^{bits})")]
    ProbeValueOutOfRange { index: u64, value: u64, bits: u32 },
    #[error("probe width must be 32 or 64, found {0}")]
    ProbeWidth(u32),

    #[error("exhaustive search is only supported for n = 2, found n = {0}")]
    ExhaustiveTooLarge(u32),
    #[error("trial count must be at least 1")]
    ZeroTrials,
    #[error("metrics for n = {0} exceed the default limit of 12 bits; pass an explicit override")]
    TooLargeForMetrics(u32),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}
