//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A geometry or schedule could not be constructed.
    #[error("construction error: {0}")]
    Construction(String),

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Requested problem size exceeds a documented ceiling.
    #[error("resource ceiling: {0}")]
    Resource(String),

    /// An iterative kernel failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// More modes than expected fell inside an energy window.
    #[error("ambiguous edge modes: {0}")]
    Ambiguity(String),

    /// An MPS is not invariant under the requested symmetry.
    #[error("state not symmetric: {0}")]
    NotSymmetric(String),

    /// Extracted matrices do not compose projectively.
    #[error("inconsistent representation: {0}")]
    InconsistentRepresentation(String),

    /// A least-squares fit did not converge.
    #[error("fit error: {0}")]
    Fit(String),
}
