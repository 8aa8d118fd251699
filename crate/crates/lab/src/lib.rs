//! Numerical observability experiments on the discretized linear KdV flow.

mod bgamma;
mod error;
mod gram_schmidt;
mod gramian;
mod linalg;
mod subspace;

pub use bgamma::{b_gamma_check, BGammaDiagnostics};
pub use error::LabError;
pub use gram_schmidt::{
    gram_schmidt_procedure, Candidate, GramSchmidtParams, GramSchmidtRun, KTilde, LevelRecord, StopReason,
    Transition, MAX_LEVEL_CAP,
};
pub use gramian::{assemble_gramian, restricted_constant, Basis, Gramian, GramianOptions, GramianSummary};
pub use linalg::{orthonormality_error, Eig};
pub use subspace::{uncontrollable_subspace, MemberInfo, SubspaceM};
