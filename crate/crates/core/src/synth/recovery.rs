use serde::{Deserialize, Serialize};

use super::prior::PriorSampler;
use super::{cell_tag, draw_training, mean, median, quantile, split_pool, std_dev, sub_seed, SynthError, TreePool};
use crate::gp::{rmse, GpModel};
use crate::kernels::{AlphaMode, GramEngine, KernelSpec, TyingScheme};
use crate::opt::{optimize, OptimizeConfig};

/// Kernel, hyperparameters and noise variance that generate the targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratingModel {
    pub spec: KernelSpec,
    pub theta: Vec<f64>,
    pub noise: f64,
}

impl GeneratingModel {
    /// Unnormalized SSTK with λ = 0.001, α = 1 and noise variance 0.01.
    pub fn sstk() -> Self {
        GeneratingModel { spec: sstk_spec(), theta: vec![0.001, 1.0], noise: 0.01 }
    }

    /// Unnormalized SASSTK with groups `S` and `other`: λ_S = 0.5,
    /// λ = 0.001, α_S = 1, α = 0.1, noise variance 0.01.
    pub fn sasstk_s() -> Self {
        GeneratingModel { spec: sasstk_s_spec(), theta: vec![0.5, 0.001, 1.0, 0.1], noise: 0.01 }
    }
}

pub(crate) fn sstk_spec() -> KernelSpec {
    KernelSpec::tree(TyingScheme::tied()).normalized(false).alpha_mode(AlphaMode::Free)
}

pub(crate) fn sasstk_s_spec() -> KernelSpec {
    KernelSpec::tree(TyingScheme::subset(&[vec!["S"]])).normalized(false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub test_size: usize,
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub generating: GeneratingModel,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            test_size: 200,
            sizes: vec![50, 200, 400],
            repetitions: 5,
            restarts: 5,
            max_iterations: 100,
            seed: 0,
            generating: GeneratingModel::sstk(),
        }
    }
}

impl RecoveryConfig {
    fn validate(&self, pool: usize) -> Result<(), SynthError> {
        let largest = self.sizes.iter().copied().max().unwrap_or(0);
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(SynthError::InvalidConfig("training sizes must be non-empty and positive".into()));
        }
        if self.repetitions == 0 {
            return Err(SynthError::InvalidConfig("repetitions must be at least 1".into()));
        }
        if self.test_size == 0 || self.test_size + largest > pool {
            return Err(SynthError::InvalidConfig(format!(
                "test size {} plus largest training size {largest} exceeds pool of {pool}",
                self.test_size
            )));
        }
        if self.generating.theta.len() != self.generating.spec.param_count() {
            return Err(SynthError::InvalidConfig("generating hyperparameters do not match the kernel".into()));
        }
        Ok(())
    }

    fn optimizer(&self, seed: u64) -> OptimizeConfig {
        OptimizeConfig { restarts: self.restarts, max_iterations: self.max_iterations, seed, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryRecord {
    pub size: usize,
    pub repetition: usize,
    pub theta: Vec<f64>,
    pub noise: f64,
    pub lml: f64,
    pub test_rmse: f64,
    pub test_target_std: f64,
}

/// Spread of one recovered hyperparameter, in log10.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSummary {
    pub name: String,
    pub truth: f64,
    pub log10_q1: f64,
    pub log10_median: f64,
    pub log10_q3: f64,
    pub median_abs_log10_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub size: usize,
    pub params: Vec<ParamSummary>,
    pub median_test_rmse: f64,
    pub mean_test_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub pool: String,
    pub param_names: Vec<String>,
    pub records: Vec<RecoveryRecord>,
    pub summaries: Vec<SizeSummary>,
    pub prior_jitter: f64,
}

/// Per size and repetition: samples targets from the generating prior over
/// the whole pool, fits the generating kernel family from random restarts on
/// a training draw and scores it on the fixed test rows.
pub fn run_recovery(pool: &TreePool, cfg: &RecoveryConfig) -> Result<RecoveryReport, SynthError> {
    cfg.validate(pool.len())?;
    let gen = &cfg.generating;
    let inputs = pool.inputs();
    let sampler = PriorSampler::new(&inputs, &gen.spec, &gen.theta, &pool.table)?;
    let engine = GramEngine::new(&gen.spec, inputs, &pool.table)?;
    let (test, candidates) = split_pool(pool.len(), cfg.test_size, sub_seed(cfg.seed, 1));
    let test_view = engine.view(&test);

    let mut records = Vec::new();
    for &size in &cfg.sizes {
        for rep in 0..cfg.repetitions {
            let y = sampler.sample(gen.noise, sub_seed(cfg.seed, cell_tag(2, size, rep)));
            let train = draw_training(&candidates, size, sub_seed(cfg.seed, cell_tag(3, size, rep)));
            let model = GpModel::from_engine(engine.view(&train), train.iter().map(|&r| y[r]).collect())?.with_centering(false);
            let out = optimize(&model, &cfg.optimizer(sub_seed(cfg.seed, cell_tag(4, size, rep))))?;
            let actual: Vec<f64> = test.iter().map(|&r| y[r]).collect();
            let pred = out.fitted.predict_view(&test_view)?;
            records.push(RecoveryRecord {
                size,
                repetition: rep,
                theta: out.theta,
                noise: out.noise,
                lml: out.lml,
                test_rmse: rmse(&pred.mean, &actual)?,
                test_target_std: std_dev(&actual),
            });
        }
    }

    let mut param_names = gen.spec.param_names();
    param_names.push("noise".into());
    let mut truth = gen.theta.clone();
    truth.push(gen.noise);
    let summaries = cfg
        .sizes
        .iter()
        .map(|&size| {
            let rows: Vec<&RecoveryRecord> = records.iter().filter(|r| r.size == size).collect();
            let params = param_names
                .iter()
                .enumerate()
                .map(|(i, name)| {
                    let mut logs: Vec<f64> = rows
                        .iter()
                        .map(|r| if i < r.theta.len() { r.theta[i] } else { r.noise }.log10())
                        .collect();
                    logs.sort_by(f64::total_cmp);
                    let errors: Vec<f64> = logs.iter().map(|l| (l - truth[i].log10()).abs()).collect();
                    ParamSummary {
                        name: name.clone(),
                        truth: truth[i],
                        log10_q1: quantile(&logs, 0.25),
                        log10_median: quantile(&logs, 0.5),
                        log10_q3: quantile(&logs, 0.75),
                        median_abs_log10_error: median(&errors),
                    }
                })
                .collect();
            let rmses: Vec<f64> = rows.iter().map(|r| r.test_rmse).collect();
            SizeSummary { size, params, median_test_rmse: median(&rmses), mean_test_rmse: mean(&rmses) }
        })
        .collect();
    Ok(RecoveryReport { pool: pool.label.clone(), param_names, records, summaries, prior_jitter: sampler.jitter() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub size: usize,
    pub repetition: usize,
    pub sstk_rmse: f64,
    pub sasstk_rmse: f64,
    pub sstk_theta: Vec<f64>,
    pub sstk_noise: f64,
    pub sstk_lml: f64,
    pub sasstk_theta: Vec<f64>,
    pub sasstk_noise: f64,
    pub sasstk_lml: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub size: usize,
    pub mean_sstk_rmse: f64,
    pub mean_sasstk_rmse: f64,
    pub median_sstk_rmse: f64,
    pub median_sasstk_rmse: f64,
    /// Repetitions where the symbol-aware kernel had the lower test RMSE.
    pub sasstk_wins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub pool: String,
    pub sstk_param_names: Vec<String>,
    pub sasstk_param_names: Vec<String>,
    pub records: Vec<ComparisonRecord>,
    pub summaries: Vec<ComparisonSummary>,
    pub prior_jitter: f64,
}

/// Fits both an SSTK and an SASSTK with groups `S` and `other` to the same
/// targets and training rows. Targets come from `cfg.generating`.
pub fn run_sasstk_comparison(pool: &TreePool, cfg: &RecoveryConfig) -> Result<ComparisonReport, SynthError> {
    cfg.validate(pool.len())?;
    let gen = &cfg.generating;
    let inputs = pool.inputs();
    let sampler = PriorSampler::new(&inputs, &gen.spec, &gen.theta, &pool.table)?;
    let (sstk, sasstk) = (sstk_spec(), sasstk_s_spec());
    let sstk_engine = GramEngine::new(&sstk, inputs.clone(), &pool.table)?;
    let sasstk_engine = GramEngine::new(&sasstk, inputs, &pool.table)?;
    let (test, candidates) = split_pool(pool.len(), cfg.test_size, sub_seed(cfg.seed, 1));

    let mut records = Vec::new();
    for &size in &cfg.sizes {
        for rep in 0..cfg.repetitions {
            let y = sampler.sample(gen.noise, sub_seed(cfg.seed, cell_tag(2, size, rep)));
            let train = draw_training(&candidates, size, sub_seed(cfg.seed, cell_tag(3, size, rep)));
            let train_y: Vec<f64> = train.iter().map(|&r| y[r]).collect();
            let actual: Vec<f64> = test.iter().map(|&r| y[r]).collect();
            let opt = cfg.optimizer(sub_seed(cfg.seed, cell_tag(4, size, rep)));
            let fit = |engine: &GramEngine| -> Result<(f64, Vec<f64>, f64, f64), SynthError> {
                let model = GpModel::from_engine(engine.view(&train), train_y.clone())?.with_centering(false);
                let out = optimize(&model, &opt)?;
                let pred = out.fitted.predict_view(&engine.view(&test))?;
                Ok((rmse(&pred.mean, &actual)?, out.theta, out.noise, out.lml))
            };
            let (sstk_rmse, sstk_theta, sstk_noise, sstk_lml) = fit(&sstk_engine)?;
            let (sasstk_rmse, sasstk_theta, sasstk_noise, sasstk_lml) = fit(&sasstk_engine)?;
            records.push(ComparisonRecord {
                size,
                repetition: rep,
                sstk_rmse,
                sasstk_rmse,
                sstk_theta,
                sstk_noise,
                sstk_lml,
                sasstk_theta,
                sasstk_noise,
                sasstk_lml,
            });
        }
    }
    let summaries = cfg
        .sizes
        .iter()
        .map(|&size| {
            let rows: Vec<&ComparisonRecord> = records.iter().filter(|r| r.size == size).collect();
            let a: Vec<f64> = rows.iter().map(|r| r.sstk_rmse).collect();
            let b: Vec<f64> = rows.iter().map(|r| r.sasstk_rmse).collect();
            ComparisonSummary {
                size,
                mean_sstk_rmse: mean(&a),
                mean_sasstk_rmse: mean(&b),
                median_sstk_rmse: median(&a),
                median_sasstk_rmse: median(&b),
                sasstk_wins: rows.iter().filter(|r| r.sasstk_rmse < r.sstk_rmse).count(),
            }
        })
        .collect();
    Ok(ComparisonReport {
        pool: pool.label.clone(),
        sstk_param_names: sstk.param_names(),
        sasstk_param_names: sasstk.param_names(),
        records,
        summaries,
        prior_jitter: sampler.jitter(),
    })
}
