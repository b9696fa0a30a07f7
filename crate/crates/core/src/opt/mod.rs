//! Hyperparameter selection: marginal-likelihood ascent with random restarts
//! and a cross-validated grid-search baseline.

mod grid;
mod lbfgs;
mod optimize;

pub use grid::{
    fold_assignment, grid_search, linspace, logspace, GridEvaluation, GridOutcome, GridSpec, NOISE_NAME,
};
pub use lbfgs::{maximize, LbfgsConfig, LbfgsResult, Termination};
pub use optimize::{
    optimize, IterRecord, LogRange, OptOutcome, OptTrace, OptimizeConfig, RestartStatus, RestartTrace,
    SamplingRanges,
};

use thiserror::Error;

use crate::gp::GpError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptError {
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error("all {restarts} restarts failed to evaluate")]
    AllRestartsFailed { restarts: usize },
    #[error("every grid point failed to fit")]
    AllGridPointsFailed,
    #[error("grid is empty")]
    EmptyGrid,
    #[error("grid has {got} hyperparameter axes, kernel needs {expected}")]
    GridShape { expected: usize, got: usize },
    #[error("{0}")]
    InvalidConfig(String),
}

impl OptError {
    pub fn code(&self) -> &'static str {
        match self {
            OptError::Gp(e) => e.code(),
            OptError::AllRestartsFailed { .. } => "all-restarts-failed",
            OptError::AllGridPointsFailed => "all-grid-points-failed",
            OptError::EmptyGrid => "empty-grid",
            OptError::GridShape { .. } => "grid-shape",
            OptError::InvalidConfig(_) => "invalid-config",
        }
    }
}

impl From<crate::kernels::KernelError> for OptError {
    fn from(e: crate::kernels::KernelError) -> Self {
        OptError::Gp(e.into())
    }
}
