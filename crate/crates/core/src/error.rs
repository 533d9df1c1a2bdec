use thiserror::Error;

use crate::admm::IterationRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis size C({order}+{dimension}, {dimension}) is not representable")]
    BasisTooLarge { dimension: usize, order: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ERF proximal solve did not converge (y = {y}, mu = {mu})")]
    ProxNonConvergence { y: f64, mu: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    /// A non-finite iterate appeared. The trace up to and including the
    /// offending iteration is attached.
    #[error("ADMM diverged at iteration {iteration}")]
    Diverged {
        iteration: usize,
        trace: Vec<IterationRecord>,
    },

    #[error("SVD failed: {0}")]
    Svd(String),

    #[error("rotation {index}: {source}")]
    Rotation {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("numerical overflow: {0}")]
    Overflow(String),

    #[error("column {0} of the measurement matrix is identically zero")]
    ZeroColumn(usize),

    #[error("validation truth vector is identically zero")]
    ZeroTruth,
}

impl Error {
    pub(crate) fn mismatch(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }
}
