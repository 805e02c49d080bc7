use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A size limit of the simulator or an exact evaluator was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// An argument violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Amplitude or spectral mass was found beyond the permitted degree.
    #[error("degree overflow: {0}")]
    DegreeOverflow(String),

    /// The postselected subspace carries (numerically) zero probability.
    #[error("postselection impossible: success probability {0:e}")]
    PostselectionImpossible(f64),

    /// A proven structural bound failed to hold. Indicates a defect, not bad input.
    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("numerical underflow: {0}")]
    NumericalUnderflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}
