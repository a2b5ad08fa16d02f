use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("field too large: p^m = {p}^{m} does not fit the element encoding")]
    FieldTooLarge { p: u64, m: u32 },
    #[error("field mismatch: GF({left}) vs GF({right})")]
    FieldMismatch { left: String, right: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("element not in the required subfield")]
    NotInSubfield,
    #[error("no embedding from GF({src}) into GF({dst})")]
    NoEmbedding { src: String, dst: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("invalid case: {0}")]
    InvalidCase(String),
    #[error("support outside the case index set")]
    OutsideSupport,
    #[error("matrix does not have the required case shape")]
    BadShape,
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("search space too large: {0}")]
    SearchTooLarge(String),
    #[error("unsupported target: {0}")]
    UnsupportedTarget(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
