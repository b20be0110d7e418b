use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("term of degree {degree} exceeds truncation order {order}")]
    DegreeOverflow { degree: u32, order: u32 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("truncation order mismatch: {left} vs {right}")]
    OrderMismatch { left: u32, right: u32 },

    #[error("variable index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("exponent vector has length {got}, expected {expected}")]
    BadExponentLength { got: usize, expected: usize },

    #[error("jet space of dimension {dim} and order {order} does not fit the packed monomial key")]
    SpaceTooLarge { dim: usize, order: u32 },

    #[error("constant term must be 1, found {found}")]
    ConstantTermNotOne { found: String },

    #[error("constant term must be nonzero")]
    ZeroConstantTerm,

    #[error("constant term must be zero, found {found}")]
    NonzeroConstantTerm { found: String },

    #[error("insufficient order: validity exhausted (need truncation order at least {needed})")]
    InsufficientOrder { needed: u32 },

    #[error("degenerate metric at origin")]
    DegenerateMetric,

    #[error("metric is not positive definite at origin")]
    NotPositiveDefinite,

    #[error("potential is not real: coefficient of {monomial} differs from its conjugate partner")]
    NotReal { monomial: String },

    #[error("requires irrational linear normalization: g(0) is not the identity")]
    IrrationalNormalization,

    #[error("not in normal coordinates: {0}")]
    NotNormal(String),

    #[error("metric is not Einstein; identity only holds for Einstein metrics")]
    NotEinstein,

    #[error("catalog entry rejected by self-check: {0}")]
    RejectedBySelfCheck(String),

    #[error("cannot parse spec `{input}`: {reason}")]
    SpecParse { input: String, reason: String },

    #[error("cannot parse jet text at line {line}: {reason}")]
    JetParse { line: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
