use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::OptError;
use crate::gp::{rmse, FittedGp, GpModel};
use crate::kernels::{KernelSpec, ParamKind};

/// Name under which the noise variance appears in named grids.
pub const NOISE_NAME: &str = "noise";

/// Candidate values for every hyperparameter and the noise variance.
///
/// Points are visited in lexicographic order: the first hyperparameter varies
/// slowest and the noise variance fastest. Ties in cross-validated RMSE go to
/// the earliest point in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub values: Vec<Vec<f64>>,
    pub noise: Vec<f64>,
    pub folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEvaluation {
    pub theta: Vec<f64>,
    pub noise: f64,
    /// Mean validation RMSE over folds; `None` when a fit failed.
    pub cv_rmse: Option<f64>,
}

pub struct GridOutcome {
    pub theta: Vec<f64>,
    pub noise: f64,
    pub cv_rmse: f64,
    pub chosen: usize,
    pub fitted: FittedGp,
    pub evaluations: Vec<GridEvaluation>,
}

pub fn linspace(low: f64, high: f64, size: usize) -> Vec<f64> {
    match size {
        0 => Vec::new(),
        1 => vec![low],
        _ => (0..size).map(|i| low + (high - low) * i as f64 / (size - 1) as f64).collect(),
    }
}

pub fn logspace(low: f64, high: f64, size: usize) -> Vec<f64> {
    linspace(low.ln(), high.ln(), size).into_iter().map(f64::exp).collect()
}

impl GridSpec {
    pub fn new(values: Vec<Vec<f64>>, noise: Vec<f64>) -> Self {
        GridSpec { values, noise, folds: 3 }
    }

    pub fn with_folds(mut self, folds: usize) -> Self {
        self.folds = folds;
        self
    }

    /// Grid with `size` values per hyperparameter: λ linear on [1e-8, 1],
    /// α linear on [1e-4, 2], noise and RBF parameters logarithmic on
    /// [1e-2, 10].
    pub fn performance(spec: &KernelSpec, size: usize) -> Self {
        let values = spec
            .param_kinds()
            .into_iter()
            .map(|k| match k {
                ParamKind::Lambda => linspace(1e-8, 1.0, size),
                ParamKind::Alpha => linspace(1e-4, 2.0, size),
                ParamKind::RbfVariance | ParamKind::RbfLengthscale => logspace(1e-2, 10.0, size),
            })
            .collect();
        GridSpec::new(values, logspace(1e-2, 10.0, size))
    }

    /// Fixed grid for text-regression tasks. RBF `γ` values map to
    /// lengthscales `1/sqrt(2γ)`; the RBF variance stays at 1.
    pub fn nlp(spec: &KernelSpec) -> Self {
        let gammas: [f64; 5] = [1e-3, 0.0178, 0.316, 5.62, 100.0];
        let values = spec
            .param_kinds()
            .into_iter()
            .map(|k| match k {
                ParamKind::Lambda => vec![1e-16, 0.25, 0.5],
                ParamKind::Alpha => vec![1.0],
                ParamKind::RbfVariance => vec![1.0],
                ParamKind::RbfLengthscale => gammas.iter().map(|g| 1.0 / (2.0 * g).sqrt()).collect(),
            })
            .collect();
        GridSpec::new(values, vec![1e-2, 1e-1, 1.0, 10.0])
    }

    /// Grid from a name → values map using the kernel's hyperparameter names
    /// plus [`NOISE_NAME`]. Every name must be present.
    pub fn from_named(spec: &KernelSpec, named: &BTreeMap<String, Vec<f64>>) -> Result<Self, OptError> {
        let names = spec.param_names();
        for key in named.keys() {
            if key != NOISE_NAME && !names.contains(key) {
                return Err(OptError::InvalidConfig(format!("grid names unknown hyperparameter '{key}'")));
            }
        }
        let lookup = |n: &str| {
            named.get(n).cloned().ok_or_else(|| OptError::InvalidConfig(format!("grid lacks values for '{n}'")))
        };
        let values = names.iter().map(|n| lookup(n)).collect::<Result<_, _>>()?;
        Ok(GridSpec::new(values, lookup(NOISE_NAME)?))
    }

    pub fn point_count(&self) -> usize {
        self.values.iter().map(Vec::len).product::<usize>() * self.noise.len()
    }

    /// All points in visiting order.
    pub fn points(&self) -> Vec<(Vec<f64>, f64)> {
        let mut out = Vec::with_capacity(self.point_count());
        let mut idx = vec![0usize; self.values.len()];
        if self.point_count() == 0 {
            return out;
        }
        loop {
            let theta: Vec<f64> = idx.iter().zip(&self.values).map(|(&i, v)| v[i]).collect();
            for &noise in &self.noise {
                out.push((theta.clone(), noise));
            }
            let mut d = self.values.len();
            loop {
                if d == 0 {
                    return out;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < self.values[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    fn validate(&self, params: usize) -> Result<(), OptError> {
        if self.values.len() != params {
            return Err(OptError::GridShape { expected: params, got: self.values.len() });
        }
        if self.point_count() == 0 {
            return Err(OptError::EmptyGrid);
        }
        if self.folds < 2 {
            return Err(OptError::InvalidConfig("grid search needs at least 2 folds".into()));
        }
        Ok(())
    }
}

/// Splits rows into `folds` contiguous blocks of a seeded shuffle. The first
/// `n % folds` blocks get one extra row. Each fold's rows are sorted.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut start = 0;
    (0..folds)
        .map(|f| {
            let len = base + usize::from(f < extra);
            let mut fold = perm[start..start + len].to_vec();
            start += len;
            fold.sort_unstable();
            fold
        })
        .collect()
}

/// Selects hyperparameters by k-fold cross-validated RMSE, then refits on all
/// rows of `model`.
pub fn grid_search(model: &GpModel, grid: &GridSpec, seed: u64) -> Result<GridOutcome, OptError> {
    grid.validate(model.param_count())?;
    let n = model.len();
    if n < grid.folds {
        return Err(OptError::InvalidConfig(format!("{n} rows cannot fill {} folds", grid.folds)));
    }
    let folds = fold_assignment(n, grid.folds, seed);
    let splits = folds
        .iter()
        .map(|held| {
            let train: Vec<usize> = (0..n).filter(|r| held.binary_search(r).is_err()).collect();
            let actual: Vec<f64> = held.iter().map(|&r| model.targets()[r]).collect();
            Ok((model.subset(&train)?, model.engine().view(held), actual))
        })
        .collect::<Result<Vec<_>, OptError>>()?;

    let evaluations: Vec<GridEvaluation> = grid
        .points()
        .into_par_iter()
        .map(|(theta, noise)| {
            let mut total = 0.0;
            for (train, held, actual) in &splits {
                let score = train
                    .fit(&theta, noise)
                    .and_then(|fit| fit.predict_view(held))
                    .and_then(|p| rmse(&p.mean, actual));
                match score {
                    Ok(s) if s.is_finite() => total += s,
                    _ => return GridEvaluation { theta, noise, cv_rmse: None },
                }
            }
            GridEvaluation { theta, noise, cv_rmse: Some(total / splits.len() as f64) }
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (i, e) in evaluations.iter().enumerate() {
        if let Some(s) = e.cv_rmse {
            if best.map_or(true, |(_, b)| s < b) {
                best = Some((i, s));
            }
        }
    }
    let (chosen, cv_rmse) = best.ok_or(OptError::AllGridPointsFailed)?;
    let (theta, noise) = (evaluations[chosen].theta.clone(), evaluations[chosen].noise);
    let fitted = model.fit(&theta, noise)?;
    Ok(GridOutcome { theta, noise, cv_rmse, chosen, fitted, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn performance_grid_size_four() {
        let g = GridSpec::performance(&KernelSpec::sstk(), 4);
        let round = |v: &[f64]| v.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>();
        assert_eq!(g.values[0][0], 1e-8);
        assert_eq!(round(&g.values[0]), vec![0.0, 0.33, 0.67, 1.0]);
        assert_eq!(g.values[1][0], 1e-4);
        assert_eq!(round(&g.values[1]), vec![0.0, 0.67, 1.33, 2.0]);
        let noise: Vec<f64> = g.noise.iter().map(|x| (x.log10() * 1e9).round() / 1e9).collect();
        assert_eq!(noise, vec![-2.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn lexicographic_order() {
        let g = GridSpec::new(vec![vec![1.0, 2.0], vec![3.0]], vec![0.1, 0.2]);
        let pts = g.points();
        assert_eq!(
            pts,
            vec![
                (vec![1.0, 3.0], 0.1),
                (vec![1.0, 3.0], 0.2),
                (vec![2.0, 3.0], 0.1),
                (vec![2.0, 3.0], 0.2)
            ]
        );
    }

    #[test]
    fn folds_partition_rows() {
        let f = fold_assignment(10, 3, 7);
        let mut all: Vec<usize> = f.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(f.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 3, 3]);
        assert_eq!(f, fold_assignment(10, 3, 7));
    }

    #[test]
    fn nlp_grid_lengthscales() {
        let spec = KernelSpec::Rbf { dim: 2 };
        let g = GridSpec::nlp(&spec);
        assert!((g.values[1][0] - 1.0 / (2e-3f64).sqrt()).abs() < 1e-12);
        assert_eq!(g.point_count(), 5 * 4);
    }

    #[test]
    fn named_grid_requires_every_name() {
        let spec = KernelSpec::sstk();
        let mut m = BTreeMap::new();
        m.insert("lambda.all".to_string(), vec![0.1]);
        m.insert("noise".to_string(), vec![0.1]);
        assert!(GridSpec::from_named(&spec, &m).is_err());
        m.insert("alpha.all".to_string(), vec![1.0, 0.5]);
        let g = GridSpec::from_named(&spec, &m).unwrap();
        assert_eq!(g.values, vec![vec![0.1], vec![1.0, 0.5]]);
        m.insert("bogus".to_string(), vec![1.0]);
        assert!(GridSpec::from_named(&spec, &m).is_err());
    }
}
