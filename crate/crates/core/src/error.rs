use thiserror::Error;

use crate::singularities::SingularityKind;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A vector fails the surface or tangency constraint.
    #[error("constraint violation: {what} (residual {residual:e})")]
    ConstraintViolation { what: String, residual: f64 },

    /// Two bodies sit on a configuration where the potential is undefined.
    #[error("singular configuration: bodies {i} and {j} ({kind:?})")]
    Singular {
        i: usize,
        j: usize,
        kind: SingularityKind,
    },

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
