use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lbfgs::{inf_norm, maximize, LbfgsConfig, Termination};
use super::OptError;
use crate::gp::{FittedGp, GpModel};
use crate::kernels::ParamKind;

/// Log-uniform sampling interval for restart initialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRange {
    pub low: f64,
    pub high: f64,
}

impl LogRange {
    pub const fn new(low: f64, high: f64) -> Self {
        LogRange { low, high }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.low == self.high {
            return self.low;
        }
        rng.gen_range(self.low.ln()..self.high.ln()).exp()
    }

    fn validate(&self, name: &str) -> Result<(), OptError> {
        if self.low > 0.0 && self.high >= self.low && self.high.is_finite() {
            Ok(())
        } else {
            Err(OptError::InvalidConfig(format!("{name} range [{}, {}] must be positive and ordered", self.low, self.high)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingRanges {
    pub lambda: LogRange,
    pub alpha: LogRange,
    pub noise: LogRange,
    pub rbf_variance: LogRange,
    pub rbf_lengthscale: LogRange,
}

impl Default for SamplingRanges {
    fn default() -> Self {
        SamplingRanges {
            lambda: LogRange::new(1e-4, 1.0),
            alpha: LogRange::new(1e-2, 2.0),
            noise: LogRange::new(1e-3, 1.0),
            rbf_variance: LogRange::new(1e-2, 10.0),
            rbf_lengthscale: LogRange::new(1e-2, 10.0),
        }
    }
}

impl SamplingRanges {
    fn for_kind(&self, kind: ParamKind) -> LogRange {
        match kind {
            ParamKind::Lambda => self.lambda,
            ParamKind::Alpha => self.alpha,
            ParamKind::RbfVariance => self.rbf_variance,
            ParamKind::RbfLengthscale => self.rbf_lengthscale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub gtol: f64,
    pub ftol: f64,
    pub seed: u64,
    pub ranges: SamplingRanges,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        let l = LbfgsConfig::default();
        OptimizeConfig {
            restarts: 10,
            max_iterations: l.max_iterations,
            gtol: l.gtol,
            ftol: l.ftol,
            seed: 0,
            ranges: SamplingRanges::default(),
        }
    }
}

impl OptimizeConfig {
    pub fn validate(&self) -> Result<(), OptError> {
        if self.restarts == 0 {
            return Err(OptError::InvalidConfig("restarts must be at least 1".into()));
        }
        if !(self.gtol > 0.0) || !(self.ftol >= 0.0) {
            return Err(OptError::InvalidConfig("tolerances must be positive".into()));
        }
        let r = &self.ranges;
        r.lambda.validate("lambda")?;
        r.alpha.validate("alpha")?;
        r.noise.validate("noise")?;
        r.rbf_variance.validate("rbf variance")?;
        r.rbf_lengthscale.validate("rbf lengthscale")
    }

    /// Seeds for each restart, drawn in order from the master seed.
    pub fn restart_seeds(&self) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.restarts).map(|_| rng.gen()).collect()
    }
}

/// One accepted point of a restart, iteration 0 being the random start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterRecord {
    pub iteration: usize,
    pub lml: f64,
    /// Infinity norm of the gradient in log coordinates.
    pub grad_norm: f64,
    /// Seconds since the restart began.
    pub seconds: f64,
    pub theta: Vec<f64>,
    pub noise: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RestartStatus {
    Converged,
    ValueTolerance,
    MaxIterations,
    LineSearchStalled,
    Failed,
}

impl From<Termination> for RestartStatus {
    fn from(t: Termination) -> Self {
        match t {
            Termination::GradientTolerance => RestartStatus::Converged,
            Termination::ValueTolerance => RestartStatus::ValueTolerance,
            Termination::MaxIterations => RestartStatus::MaxIterations,
            Termination::LineSearchFailed => RestartStatus::LineSearchStalled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartTrace {
    pub seed: u64,
    pub iterations: Vec<IterRecord>,
    pub final_lml: Option<f64>,
    pub status: RestartStatus,
}

impl RestartTrace {
    /// The last record at or before `budget` accepted steps.
    pub fn at_budget(&self, budget: usize) -> Option<&IterRecord> {
        self.iterations.iter().take_while(|r| r.iteration <= budget).last()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptTrace {
    pub restarts: Vec<RestartTrace>,
    pub chosen: usize,
}

impl OptTrace {
    /// Best record over all restarts when each is cut at `budget` steps, ties
    /// resolved by restart order.
    pub fn best_at_budget(&self, budget: usize) -> Option<&IterRecord> {
        let mut best: Option<&IterRecord> = None;
        for r in &self.restarts {
            if let Some(rec) = r.at_budget(budget) {
                if best.map_or(true, |b| rec.lml > b.lml) {
                    best = Some(rec);
                }
            }
        }
        best
    }

    /// Sum over restarts of the seconds spent to reach `budget` steps.
    pub fn seconds_at_budget(&self, budget: usize) -> f64 {
        self.restarts.iter().filter_map(|r| r.at_budget(budget)).map(|r| r.seconds).sum()
    }
}

pub struct OptOutcome {
    pub theta: Vec<f64>,
    pub noise: f64,
    pub lml: f64,
    pub fitted: FittedGp,
    pub trace: OptTrace,
}

/// Maximizes the log marginal likelihood over the kernel hyperparameters and
/// the noise variance, in log coordinates, from `cfg.restarts` random starts.
pub fn optimize(model: &GpModel, cfg: &OptimizeConfig) -> Result<OptOutcome, OptError> {
    cfg.validate()?;
    let kinds = model.spec().param_kinds();
    let seeds = cfg.restart_seeds();
    let restarts: Vec<RestartTrace> = seeds.par_iter().map(|&s| run_restart(model, cfg, &kinds, s)).collect();
    let mut chosen = None;
    for (i, r) in restarts.iter().enumerate() {
        if let Some(v) = r.final_lml {
            if chosen.map_or(true, |(_, best)| v > best) {
                chosen = Some((i, v));
            }
        }
    }
    let (chosen, lml) = chosen.ok_or(OptError::AllRestartsFailed { restarts: cfg.restarts })?;
    let last = restarts[chosen].iterations.last().expect("successful restart has records");
    let (theta, noise) = (last.theta.clone(), last.noise);
    let fitted = model.fit(&theta, noise)?;
    Ok(OptOutcome { theta, noise, lml, fitted, trace: OptTrace { restarts, chosen } })
}

fn run_restart(model: &GpModel, cfg: &OptimizeConfig, kinds: &[ParamKind], seed: u64) -> RestartTrace {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u0: Vec<f64> = kinds.iter().map(|&k| cfg.ranges.for_kind(k).sample(&mut rng).ln()).collect();
    u0.push(cfg.ranges.noise.sample(&mut rng).ln());

    let objective = |u: &[f64]| -> Option<(f64, Vec<f64>)> {
        let nat: Vec<f64> = u.iter().map(|v| v.exp()).collect();
        let (theta, noise) = nat.split_at(nat.len() - 1);
        let fit = model.fit_with_gradients(theta, noise[0]).ok()?;
        let lml = fit.log_marginal_likelihood().total;
        let grad = fit.lml_gradient().ok()?;
        Some((lml, grad.iter().zip(&nat).map(|(g, p)| g * p).collect()))
    };
    let lbfgs = LbfgsConfig { max_iterations: cfg.max_iterations, gtol: cfg.gtol, ftol: cfg.ftol, ..Default::default() };
    let mut iterations = Vec::new();
    let result = maximize(&u0, objective, &lbfgs, |iteration, u, lml, g| {
        let nat: Vec<f64> = u.iter().map(|v| v.exp()).collect();
        let (theta, noise) = nat.split_at(nat.len() - 1);
        iterations.push(IterRecord {
            iteration,
            lml,
            grad_norm: inf_norm(g),
            seconds: start.elapsed().as_secs_f64(),
            theta: theta.to_vec(),
            noise: noise[0],
        });
    });
    match result {
        Some(r) => RestartTrace { seed, iterations, final_lml: Some(r.value), status: r.termination.into() },
        None => RestartTrace { seed, iterations, final_lml: None, status: RestartStatus::Failed },
    }
}
