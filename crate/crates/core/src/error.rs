//! Shared error type.
//!
//! Errors fall into three classes, matching the CLI exit-code contract:
//! schema problems (malformed input), mathematical precondition failures
//! (well-formed input outside a formula's hypotheses), and internal
//! inconsistencies (a structural fact the library relies on failed to hold —
//! these indicate a bug and are always worth a loud failure).

use thiserror::Error;

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input: unparseable expressions, bad JSON, unknown names.
    Schema,
    /// Input is well-formed but violates a mathematical precondition.
    Precondition,
    /// An internal invariant failed; indicates a bug in the library.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    // ---- schema ----
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported family or rank: {0}")]
    UnsupportedFamily(String),
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),

    // ---- mathematical preconditions ----
    #[error("coweight is not minuscule: {0}")]
    NotMinuscule(String),
    #[error("coweight is not dominant: {0}")]
    NotDominant(String),
    #[error("leg tuple is not admissible: {0}")]
    Inadmissible(String),
    #[error("polynomial is not invariant: {0}")]
    NotInvariant(String),
    #[error("degree precondition violated: {0}")]
    WrongDegree(String),
    #[error("evaluation at a zero or pole: {0}")]
    PoleOrZero(String),
    #[error("eigenweight operators do not commute: {0}")]
    NonCommuting(String),
    #[error("irrational eigenvalue: {0}")]
    IrrationalEigenvalue(String),
    #[error("repeated interpolation points: {0}")]
    RepeatedPoints(String),
    #[error("invalid Weyl element: {0}")]
    InvalidWeylElement(String),
    #[error("inconsistent data: {0}")]
    InconsistentData(String),

    // ---- internal inconsistencies ----
    #[error("nonzero remainder in exact division: {0}")]
    NonzeroRemainder(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cannot express element in fundamental invariants: {0}")]
    NotExpressible(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl Error {
    /// Which exit-code class this error belongs to.
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Parse(_) | UnsupportedFamily(_) | UnsupportedGroup(_) | InvalidInput(_) => {
                ErrorClass::Schema
            }
            NotMinuscule(_) | NotDominant(_) | Inadmissible(_) | NotInvariant(_)
            | WrongDegree(_) | PoleOrZero(_) | NonCommuting(_) | IrrationalEigenvalue(_)
            | RepeatedPoints(_) | InvalidWeylElement(_) | InconsistentData(_) => {
                ErrorClass::Precondition
            }
            NonzeroRemainder(_) | DimensionMismatch(_) | NotExpressible(_) | Internal(_) => {
                ErrorClass::Internal
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
