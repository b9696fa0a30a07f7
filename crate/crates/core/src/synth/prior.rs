use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SynthError;
use crate::gp::{cholesky_with_jitter, JitterPolicy};
use crate::kernels::{GramEngine, Input, KernelSpec};
use crate::trees::SymbolTable;

/// Draws function values from a zero-mean GP prior over a fixed input set.
///
/// Identical inputs share one latent value, so the prior factor is computed
/// over distinct inputs only and needs no jitter for exact duplicates.
pub struct PriorSampler {
    factor: DMatrix<f64>,
    index: Vec<usize>,
    jitter: f64,
}

fn input_key(input: &Input, table: &SymbolTable) -> Result<String, SynthError> {
    let mut key = String::new();
    for t in &input.trees {
        key.push_str(&t.to_bracketed(table)?);
        key.push('\u{1}');
    }
    if let Some(f) = &input.features {
        for v in f {
            key.push_str(&format!("{:x},", v.to_bits()));
        }
    }
    Ok(key)
}

impl PriorSampler {
    pub fn new(inputs: &[Input], spec: &KernelSpec, theta: &[f64], table: &SymbolTable) -> Result<Self, SynthError> {
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut unique = Vec::new();
        let mut index = Vec::with_capacity(inputs.len());
        for input in inputs {
            let key = input_key(input, table)?;
            let next = unique.len();
            let id = *seen.entry(key).or_insert(next);
            if id == next {
                unique.push(input.clone());
            }
            index.push(id);
        }
        let k = GramEngine::uncached(spec, unique, table)?.gram(theta)?;
        let (chol, jitter) = cholesky_with_jitter(k, 0.0, JitterPolicy::Escalate)?;
        Ok(PriorSampler { factor: chol.unpack(), index, jitter })
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn distinct_inputs(&self) -> usize {
        self.factor.nrows()
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// `f + ε` with `f = L z` over distinct inputs and `ε ~ N(0, noise)` per
    /// row.
    pub fn sample(&self, noise: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = self.factor.nrows();
        let z = DVector::from_iterator(m, (0..m).map(|_| StandardNormal.sample(&mut rng)));
        let f = &self.factor * z;
        let sd = noise.max(0.0).sqrt();
        self.index
            .iter()
            .map(|&i| {
                let e: f64 = StandardNormal.sample(&mut rng);
                f[i] + sd * e
            })
            .collect()
    }
}

/// Samples targets for `inputs` from the GP prior with kernel `spec` at
/// `theta` plus Gaussian noise of variance `noise`.
pub fn sample_prior_targets(
    inputs: &[Input],
    spec: &KernelSpec,
    theta: &[f64],
    noise: f64,
    seed: u64,
    table: &SymbolTable,
) -> Result<Vec<f64>, SynthError> {
    Ok(PriorSampler::new(inputs, spec, theta, table)?.sample(noise, seed))
}
