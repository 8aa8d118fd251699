use obscost_core::CoreError;
use obscost_kdv::KdvError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("resource guard: N * steps = {work} exceeds the budget {budget}")]
    ResourceGuard { work: u64, budget: u64 },
    #[error("dimension mismatch: expected vectors of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("deflated space is empty: the subspace covers all {0} Gramian directions")]
    NothingToObserve(usize),
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Kdv(#[from] KdvError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl LabError {
    /// Errors caused by inputs rather than internal failures.
    pub fn is_domain(&self) -> bool {
        match self {
            LabError::Eigensolver(_) => false,
            LabError::Core(e) => e.is_domain(),
            LabError::Kdv(KdvError::SingularFactorization { .. } | KdvError::Io(_)) => false,
            _ => true,
        }
    }
}
