//! Gaussian process regression over constituency trees.
//!
//! The crate parses bracketed trees, evaluates subset tree kernels with
//! per-symbol hyperparameters and exact gradients, fits GP models by
//! maximizing the log marginal likelihood, and ships synthetic experiments
//! for studying hyperparameter recovery.

pub mod kernels;
pub mod trees;
pub mod gp;
pub mod opt;
pub mod synth;
pub mod cli;
