//! Subset tree kernels, their symbol-tied variants, and composition with a
//! dense RBF kernel.
//!
//! Every kernel value comes with its gradient with respect to the flattened
//! hyperparameter vector described by [`KernelSpec`].

mod delta;
mod gram;
mod normalize;
pub mod oracle;
mod rbf;
mod scheme;
mod spec;

pub use delta::{sstk_delta_with_grads, tree_kernel, PairPlan, TreeKernelEval};
pub use gram::{gram_with_grads, CrossGram, GramEngine, GramResult};
pub use normalize::normalize_with_grads;
pub use rbf::{rbf_with_grads, RbfHypers};
pub use scheme::{AlphaMode, GroupMap, SchemeKind, TreeKernelHypers, TyingScheme, CATCH_ALL};
pub use spec::{Input, KernelSpec, ParamKind};

use thiserror::Error;

use crate::trees::TreeError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("symbol '{0}' has no group and the scheme has no catch-all")]
    UnknownSymbol(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot normalize with self-kernels {k11} and {k22}")]
    DegenerateSelfKernel { k11: f64, k22: f64 },
    #[error("tree has {nodes} nodes, limit is {max}")]
    TooLarge { nodes: usize, max: usize },
    #[error("expected {expected} hyperparameters, got {got}")]
    HyperCount { expected: usize, got: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyper(String),
    #[error("input lacks {0}")]
    MissingSlot(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

impl KernelError {
    pub fn code(&self) -> &'static str {
        match self {
            KernelError::UnknownSymbol(_) => "unknown-symbol",
            KernelError::DimensionMismatch { .. } => "dimension-mismatch",
            KernelError::DegenerateSelfKernel { .. } => "degenerate-self-kernel",
            KernelError::TooLarge { .. } => "too-large",
            KernelError::HyperCount { .. } => "hyper-count",
            KernelError::InvalidHyper(_) => "invalid-hyper",
            KernelError::MissingSlot(_) => "missing-input",
            KernelError::Tree(e) => e.code(),
        }
    }
}
