use thiserror::Error;

use crate::circuit::{Diagnostic, GateId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} does not fit below 2^63")]
    ModulusTooLarge(u64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("circuit is malformed ({} diagnostics, first: {})", .0.len(), .0[0])]
    Invalid(Vec<Diagnostic>),
    #[error("circuit must have binary fan-in and be right-heavy (gate {0})")]
    NotNormalized(GateId),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("field of size {p} is too small for per-variable degree {k}")]
    FieldTooSmall { p: u64, k: u32 },
    #[error("circuit is not balanced: {0}")]
    NotBalanced(String),
    #[error("expansion needs up to {needed} monomials, budget is {budget}")]
    ExpansionTooLarge { needed: u128, budget: u128 },
    #[error("{count} proof-trees exceed the cap of {cap}")]
    TooManyProofTrees { count: u128, cap: u128 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("operands disagree on arity or field")]
    IncompatibleArity,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
