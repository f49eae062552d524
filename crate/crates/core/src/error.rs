use thiserror::Error;

use crate::diagram::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),
    #[error("port `{0}` is not finite-typed")]
    NonFiniteType(String),
    #[error("port `{0}` is not real-typed")]
    NonRealType(String),
    #[error("ill-posed algebraic loop: pivot {pivot:e} below tolerance {eps:e}")]
    IllPosedLoop { pivot: f64, eps: f64 },
    #[error("enumeration of {size} candidates exceeds cap {cap}")]
    ExplosionGuard { size: u128, cap: u64 },
    #[error("unknown state index {0}")]
    UnknownState(usize),
    #[error("partial input valuation: {0}")]
    PartialInput(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("horizon mismatch: expected {expected}, found {found}")]
    HorizonMismatch { expected: usize, found: usize },
    #[error("invalid diagram: {0}")]
    InvalidDiagram(ValidationReport),
    #[error("missing assignment for `{0}`")]
    MissingAssignment(String),
    #[error("hierarchy deeper than {0} levels")]
    DepthExceeded(usize),
    #[error("mixed algebras at `{0}`")]
    MixedAlgebra(String),
    #[error("unknown box `{0}`")]
    UnknownBox(String),
    #[error("malformed machine: {0}")]
    MalformedMachine(String),
    #[error("malformed contract: {0}")]
    MalformedContract(String),
}

impl Error {
    /// Prefixes a box path onto errors that name a location.
    pub(crate) fn at(self, path: &str) -> Self {
        match self {
            Error::InterfaceMismatch(m) => Error::InterfaceMismatch(format!("{path}: {m}")),
            other => other,
        }
    }
}
