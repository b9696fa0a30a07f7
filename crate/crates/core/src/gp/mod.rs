//! Exact Gaussian process regression on top of the kernel engine.

mod metrics;
mod model;

pub use metrics::{mae, metrics, pearson, rmse, Metrics};
pub use model::{cholesky_with_jitter, FittedGp, GpModel, JitterPolicy, Lml, Prediction};

use thiserror::Error;

use crate::kernels::KernelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("matrix not positive definite after jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },
    #[error("noise variance must be finite and non-negative, got {0}")]
    InvalidNoise(f64),
    #[error("expected {expected} targets, got {got}")]
    TargetCount { expected: usize, got: usize },
    #[error("a GP needs at least one training point")]
    NoTrainingData,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("at least {needed} points required, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("correlation undefined for a constant vector")]
    ConstantVector,
}

impl GpError {
    pub fn code(&self) -> &'static str {
        match self {
            GpError::Kernel(e) => e.code(),
            GpError::NotPositiveDefinite { .. } => "not-positive-definite",
            GpError::InvalidNoise(_) => "invalid-noise",
            GpError::TargetCount { .. } => "target-count",
            GpError::NoTrainingData => "no-training-data",
            GpError::LengthMismatch { .. } => "length-mismatch",
            GpError::TooFewPoints { .. } => "too-few-points",
            GpError::ConstantVector => "constant-vector",
        }
    }
}
