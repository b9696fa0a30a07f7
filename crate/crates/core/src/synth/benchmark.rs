use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::prior::PriorSampler;
use super::recovery::GeneratingModel;
use super::{cell_tag, draw_training, mean, split_pool, std_dev, sub_seed, SynthError, TreePool};
use crate::gp::{rmse, GpModel};
use crate::kernels::{GramEngine, Input};
use crate::opt::{grid_search, optimize, GridSpec, OptimizeConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub train_size: usize,
    pub test_size: usize,
    pub runs: usize,
    /// Iteration caps for the gradient method, ascending.
    pub budgets: Vec<usize>,
    /// Values per hyperparameter for grid search, ascending.
    pub granularities: Vec<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub generating: GeneratingModel,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            train_size: 200,
            test_size: 200,
            runs: 3,
            budgets: vec![0, 1, 2, 3, 5, 10, 20, 50],
            granularities: vec![2, 3, 4, 5, 6],
            restarts: 2,
            seed: 0,
            generating: GeneratingModel::sstk(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub run: usize,
    pub method: String,
    pub setting: usize,
    pub seconds: f64,
    pub test_rmse: f64,
    /// Lowest RMSE of this method and run over settings up to this one.
    pub best_so_far_rmse: f64,
    pub theta: Vec<f64>,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkSummary {
    pub method: String,
    pub setting: usize,
    pub mean_seconds: f64,
    pub mean_rmse: f64,
    pub std_rmse: f64,
}

/// Gradient method versus the finest grid. The RMSE threshold is the finest
/// grid's mean RMSE plus 5% of the test-target standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkVerdict {
    pub target_std: f64,
    pub finest_grid_rmse: f64,
    pub finest_grid_seconds: f64,
    pub gradient_final_rmse: f64,
    pub rmse_threshold: f64,
    /// Smallest budget whose mean RMSE is within the threshold.
    pub budget_to_reach: Option<usize>,
    pub seconds_to_reach: Option<f64>,
    pub rmse_ok: bool,
    pub time_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub pool: String,
    pub rows: Vec<BenchmarkRow>,
    pub summaries: Vec<BenchmarkSummary>,
    pub verdict: BenchmarkVerdict,
}

pub const GRADIENT: &str = "gradient";
pub const GRID: &str = "grid";

/// Times gradient-based selection at each iteration budget against grid
/// search at each granularity on one worker thread. Every run draws new
/// targets and training rows; the test rows stay fixed.
///
/// Gradient rows for all budgets come from one traced optimization per run:
/// with a budget `b`, L-BFGS follows the same path and stops at step `b`, so
/// the row takes each restart's record at `b` and the seconds spent reaching
/// it, plus engine construction and the final fit and prediction.
pub fn run_time_benchmark(pool: &TreePool, cfg: &BenchmarkConfig) -> Result<BenchmarkReport, SynthError> {
    if cfg.runs == 0 || cfg.budgets.is_empty() || cfg.granularities.is_empty() || cfg.restarts == 0 {
        return Err(SynthError::InvalidConfig("runs, budgets, granularities and restarts must be non-empty".into()));
    }
    if cfg.train_size + cfg.test_size > pool.len() {
        return Err(SynthError::InvalidConfig(format!(
            "train {} plus test {} exceeds pool of {}",
            cfg.train_size,
            cfg.test_size,
            pool.len()
        )));
    }
    let workers = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| SynthError::InvalidConfig(format!("thread pool: {e}")))?;
    workers.install(|| run_single_threaded(pool, cfg))
}

fn run_single_threaded(pool: &TreePool, cfg: &BenchmarkConfig) -> Result<BenchmarkReport, SynthError> {
    let gen = &cfg.generating;
    let inputs = pool.inputs();
    let sampler = PriorSampler::new(&inputs, &gen.spec, &gen.theta, &pool.table)?;
    let (test, candidates) = split_pool(pool.len(), cfg.test_size, sub_seed(cfg.seed, 1));
    let test_inputs: Vec<Input> = test.iter().map(|&r| inputs[r].clone()).collect();
    let mut budgets = cfg.budgets.clone();
    budgets.sort_unstable();
    let mut grans = cfg.granularities.clone();
    grans.sort_unstable();

    let mut rows = Vec::new();
    let mut test_stds = Vec::new();
    for run in 0..cfg.runs {
        let y = sampler.sample(gen.noise, sub_seed(cfg.seed, cell_tag(5, cfg.train_size, run)));
        let train = draw_training(&candidates, cfg.train_size, sub_seed(cfg.seed, cell_tag(6, cfg.train_size, run)));
        let train_inputs: Vec<Input> = train.iter().map(|&r| inputs[r].clone()).collect();
        let train_y: Vec<f64> = train.iter().map(|&r| y[r]).collect();
        let actual: Vec<f64> = test.iter().map(|&r| y[r]).collect();
        test_stds.push(std_dev(&actual));

        // Gradient method.
        let start = Instant::now();
        let engine = GramEngine::new(&gen.spec, train_inputs.clone(), &pool.table)?;
        let model = GpModel::from_engine(engine, train_y.clone())?.with_centering(false);
        let build = start.elapsed().as_secs_f64();
        let opt_cfg = OptimizeConfig {
            restarts: cfg.restarts,
            max_iterations: *budgets.last().expect("non-empty"),
            seed: sub_seed(cfg.seed, cell_tag(7, cfg.train_size, run)),
            ..Default::default()
        };
        let out = optimize(&model, &opt_cfg)?;
        let mut best = f64::INFINITY;
        for &b in &budgets {
            let rec = out.trace.best_at_budget(b).expect("chosen restart has records");
            let t = Instant::now();
            let pred = model.fit(&rec.theta, rec.noise)?.predict(&test_inputs)?;
            let score = rmse(&pred.mean, &actual)?;
            let seconds = build + out.trace.seconds_at_budget(b) + t.elapsed().as_secs_f64();
            best = best.min(score);
            rows.push(BenchmarkRow {
                run,
                method: GRADIENT.into(),
                setting: b,
                seconds,
                test_rmse: score,
                best_so_far_rmse: best,
                theta: rec.theta.clone(),
                noise: rec.noise,
            });
        }

        // Grid search.
        let mut best = f64::INFINITY;
        for &g in &grans {
            let start = Instant::now();
            let engine = GramEngine::new(&gen.spec, train_inputs.clone(), &pool.table)?;
            let model = GpModel::from_engine(engine, train_y.clone())?.with_centering(false);
            let grid = GridSpec::performance(&gen.spec, g);
            let out = grid_search(&model, &grid, sub_seed(cfg.seed, cell_tag(8, g, run)))?;
            let pred = out.fitted.predict(&test_inputs)?;
            let seconds = start.elapsed().as_secs_f64();
            let score = rmse(&pred.mean, &actual)?;
            best = best.min(score);
            rows.push(BenchmarkRow {
                run,
                method: GRID.into(),
                setting: g,
                seconds,
                test_rmse: score,
                best_so_far_rmse: best,
                theta: out.theta,
                noise: out.noise,
            });
        }
    }

    let summarize = |method: &str, setting: usize| {
        let sel: Vec<&BenchmarkRow> = rows.iter().filter(|r| r.method == method && r.setting == setting).collect();
        let secs: Vec<f64> = sel.iter().map(|r| r.seconds).collect();
        let scores: Vec<f64> = sel.iter().map(|r| r.test_rmse).collect();
        BenchmarkSummary {
            method: method.into(),
            setting,
            mean_seconds: mean(&secs),
            mean_rmse: mean(&scores),
            std_rmse: std_dev(&scores),
        }
    };
    let mut summaries: Vec<BenchmarkSummary> = budgets.iter().map(|&b| summarize(GRADIENT, b)).collect();
    summaries.extend(grans.iter().map(|&g| summarize(GRID, g)));

    let finest = summarize(GRID, *grans.last().expect("non-empty"));
    let final_grad = summarize(GRADIENT, *budgets.last().expect("non-empty"));
    let target_std = mean(&test_stds);
    let threshold = finest.mean_rmse + 0.05 * target_std;
    let reach = budgets.iter().map(|&b| summarize(GRADIENT, b)).find(|s| s.mean_rmse <= threshold);
    let verdict = BenchmarkVerdict {
        target_std,
        finest_grid_rmse: finest.mean_rmse,
        finest_grid_seconds: finest.mean_seconds,
        gradient_final_rmse: final_grad.mean_rmse,
        rmse_threshold: threshold,
        budget_to_reach: reach.as_ref().map(|s| s.setting),
        seconds_to_reach: reach.as_ref().map(|s| s.mean_seconds),
        rmse_ok: final_grad.mean_rmse <= threshold,
        time_ok: reach.as_ref().is_some_and(|s| s.mean_seconds < finest.mean_seconds),
    };
    Ok(BenchmarkReport { pool: pool.label.clone(), rows, summaries, verdict })
}
