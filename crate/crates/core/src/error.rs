use thiserror::Error;

/// Errors produced anywhere in the scheme.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not an odd prime")]
    InvalidModulus(String),

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is singular modulo q (no pivot in column {column})")]
    Singular { column: usize },

    #[error("linear system is inconsistent modulo q")]
    Inconsistent,

    #[error("zero polynomial has no leading term")]
    ZeroPolynomial,

    #[error("reduction stalled at monomial {0}: no divisor in the reducing set")]
    ReductionStalled(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{what} failed after {attempts} attempts")]
    GenerationFailure { what: &'static str, attempts: usize },

    #[error("multiplicative depth {needed} exceeds the budget L = {budget}")]
    DepthExceeded { needed: usize, budget: usize },

    #[error("evaluation key variant mismatch: {0}")]
    VariantMismatch(&'static str),

    #[error("value {0} does not have a denominator dividing 2^u")]
    NotDyadic(String),

    #[error("ciphertexts or keys were produced under different parameters")]
    ParamsMismatch,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("expected {expected} inputs, got {found}")]
    Arity { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
