//! Synthetic experiments: trees with targets drawn from a known GP prior,
//! hyperparameter recovery, SASSTK-vs-SSTK learning curves and a
//! gradient-vs-grid timing benchmark.
//!
//! Targets here come from a zero-mean prior, so every experiment fits them
//! uncentered.

mod benchmark;
mod prior;
mod recovery;
mod treebank;

pub use benchmark::{run_time_benchmark, BenchmarkConfig, BenchmarkReport, BenchmarkRow, BenchmarkSummary, BenchmarkVerdict};
pub use prior::{sample_prior_targets, PriorSampler};
pub use recovery::{
    run_recovery, run_sasstk_comparison, ComparisonRecord, ComparisonReport, ComparisonSummary, GeneratingModel,
    ParamSummary, RecoveryConfig, RecoveryRecord, RecoveryReport, SizeSummary,
};
pub use treebank::{generate_treebank, TreebankConfig};

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gp::GpError;
use crate::kernels::{Input, KernelError};
use crate::opt::OptError;
use crate::trees::{parse_tree_lines, read_tree_file, ParsedTree, SymbolTable, TreeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error("{0}")]
    InvalidConfig(String),
}

impl SynthError {
    pub fn code(&self) -> &'static str {
        match self {
            SynthError::Tree(e) => e.code(),
            SynthError::Kernel(e) => e.code(),
            SynthError::Gp(e) => e.code(),
            SynthError::Opt(e) => e.code(),
            SynthError::InvalidConfig(_) => "invalid-config",
        }
    }
}

/// Trees sharing one symbol table, with a label naming their origin.
pub struct TreePool {
    pub table: SymbolTable,
    pub trees: Vec<ParsedTree>,
    pub label: String,
}

impl TreePool {
    pub fn generated(cfg: &TreebankConfig) -> Result<Self, SynthError> {
        let text = generate_treebank(cfg).join("\n");
        let label = format!("generated(size={}, seed={}, max_depth={})", cfg.size, cfg.seed, cfg.max_depth);
        Self::from_text(&text, label)
    }

    pub fn from_text(text: &str, label: String) -> Result<Self, SynthError> {
        let mut table = SymbolTable::new();
        let trees = parse_tree_lines(text, &mut table)?;
        Ok(TreePool { table, trees, label })
    }

    pub fn from_file(path: &Path) -> Result<Self, SynthError> {
        let mut table = SymbolTable::new();
        let trees = read_tree_file(path, &mut table)?;
        Ok(TreePool { table, trees, label: format!("file({})", path.display()) })
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn inputs(&self) -> Vec<Input> {
        self.trees.iter().cloned().map(Input::tree).collect()
    }
}

/// Derives an independent seed for a sub-task from the master seed.
pub fn sub_seed(master: u64, tag: u64) -> u64 {
    // splitmix64 finalizer over the combined value.
    let mut z = master ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn cell_tag(kind: u64, size: usize, rep: usize) -> u64 {
    (kind << 48) ^ ((size as u64) << 20) ^ rep as u64
}

/// Fixed test rows and the remaining candidate training rows.
pub(crate) fn split_pool(n: usize, test_size: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test = perm[..test_size].to_vec();
    test.sort_unstable();
    (test, perm[test_size..].to_vec())
}

/// `size` rows drawn without replacement from `candidates`, sorted.
pub(crate) fn draw_training(candidates: &[usize], size: usize, seed: u64) -> Vec<usize> {
    let mut rows: Vec<usize> = candidates.choose_multiple(&mut ChaCha8Rng::seed_from_u64(seed), size).copied().collect();
    rows.sort_unstable();
    rows
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(std_dev(&[1.0, 3.0]), 1.0);
    }

    #[test]
    fn splits_are_disjoint() {
        let (test, cand) = split_pool(30, 10, 5);
        assert_eq!(test.len(), 10);
        let train = draw_training(&cand, 15, 9);
        assert!(train.iter().all(|r| test.binary_search(r).is_err()));
        let mut all = [test, cand].concat();
        all.sort_unstable();
        assert_eq!(all, (0..30).collect::<Vec<_>>());
    }

    #[test]
    fn sub_seeds_differ() {
        assert_ne!(sub_seed(1, 2), sub_seed(1, 3));
        assert_ne!(sub_seed(1, 2), sub_seed(2, 2));
        assert_eq!(sub_seed(7, 7), sub_seed(7, 7));
    }
}
