use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{e} exceeds the supported bound 2^20")]
    OrderTooLarge { p: u64, e: u32 },
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by zero in GF({q})")]
    DivisionByZero { q: u64 },
    #[error("value {value} is not an element of GF({q})")]
    ValueOutOfRange { value: u64, q: u64 },
    #[error("operands live in different ambient spaces")]
    AmbientMismatch,
    #[error("coordinate vector has wrong length (expected {expected}, got {got})")]
    BadVectorLength { expected: usize, got: usize },
    #[error("the zero vector does not represent a projective point")]
    ZeroVector,
    #[error("dimension {dim} is out of range ({min} to {max})")]
    DimensionOutOfRange { dim: isize, min: isize, max: isize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("point {point:?} lies in {count} elements, at most 2 are allowed")]
    CoverageViolation { point: Vec<u32>, count: usize },
    #[error("family fails the order-1 extension hypotheses: {0}")]
    HypothesesNotMet(String),
    #[error("a span of two elements contains {count} family members, contradicting the pair/big classification")]
    UnclassifiablePairSpan { count: usize },
    #[error("extension search exhausted after recovering {recovered} of {missing} elements")]
    ExtensionFailed { recovered: usize, missing: usize },
    #[error("only {got} distinct shares of the {needed} required; their span has dimension {span_dim}, reconstruction needs {span_needed}")]
    NotEnoughShares {
        needed: usize,
        got: usize,
        span_dim: isize,
        span_needed: isize,
    },
    #[error("reconstruction failed: {0}")]
    ReconstructionFailed(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
