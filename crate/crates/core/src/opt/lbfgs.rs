//! Limited-memory BFGS ascent with a backtracking Armijo line search.
//!
//! The objective returns `None` where it cannot be evaluated; the line search
//! treats such points as `−∞` and shrinks the step.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsConfig {
    pub max_iterations: usize,
    /// Stop when the gradient's infinity norm falls below this.
    pub gtol: f64,
    /// Stop when an accepted step improves the value by less than
    /// `ftol · max(1, |f|)`.
    pub ftol: f64,
    pub memory: usize,
    /// Largest change of any coordinate in one step.
    pub max_step: f64,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        LbfgsConfig { max_iterations: 100, gtol: 1e-5, ftol: 1e-10, memory: 10, max_step: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    GradientTolerance,
    ValueTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximizes `f` from `x0`. `observe(iteration, x, value, gradient)` runs for
/// the starting point and after every accepted step. Returns `None` if `f`
/// fails at `x0`.
pub fn maximize<F, O>(x0: &[f64], mut f: F, cfg: &LbfgsConfig, mut observe: O) -> Option<LbfgsResult>
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
    O: FnMut(usize, &[f64], f64, &[f64]),
{
    let valid = |r: &(f64, Vec<f64>)| r.0.is_finite() && r.1.iter().all(|g| g.is_finite());
    let (mut value, mut grad) = f(x0).filter(valid)?;
    let mut x = x0.to_vec();
    observe(0, &x, value, &grad);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iter = 0;
    let termination = loop {
        if inf_norm(&grad) <= cfg.gtol {
            break Termination::GradientTolerance;
        }
        if iter >= cfg.max_iterations {
            break Termination::MaxIterations;
        }
        // Two-loop recursion on the ascent problem: direction ≈ −H⁻¹∇(−f).
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = match history.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / inf_norm(&grad).max(1.0),
        };
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir = q;
        let mut slope = dot(&grad, &dir);
        if !(slope > 0.0) {
            history.clear();
            dir = grad.clone();
            slope = dot(&grad, &dir);
        }
        let biggest = inf_norm(&dir);
        let mut step = if biggest > cfg.max_step { cfg.max_step / biggest } else { 1.0 };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            if let Some(r) = f(&trial).filter(valid) {
                if r.0 >= value + ARMIJO * step * slope {
                    accepted = Some((trial, r));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((x_new, (v_new, g_new))) = accepted else {
            break Termination::LineSearchFailed;
        };
        iter += 1;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        // Curvature pair for the minimization of −f.
        let y: Vec<f64> = grad.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let gain = v_new - value;
        x = x_new;
        value = v_new;
        grad = g_new;
        observe(iter, &x, value, &grad);
        if gain <= cfg.ftol * value.abs().max(1.0) {
            break Termination::ValueTolerance;
        }
    };
    Some(LbfgsResult { x, value, gradient: grad, iterations: iter, termination })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        Some((-v, g.into_iter().map(|x| -x).collect()))
    }

    #[test]
    fn finds_rosenbrock_optimum() {
        let cfg = LbfgsConfig { max_iterations: 500, gtol: 1e-8, ftol: 0.0, ..Default::default() };
        let r = maximize(&[-1.2, 1.0], rosenbrock, &cfg, |_, _, _, _| {}).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r);
        assert_eq!(r.termination, Termination::GradientTolerance);
    }

    #[test]
    fn accepted_values_increase() {
        let mut seen = Vec::new();
        let cfg = LbfgsConfig { max_iterations: 50, ..Default::default() };
        maximize(&[-1.2, 1.0], rosenbrock, &cfg, |_, _, v, _| seen.push(v)).unwrap();
        assert!(seen.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_budget_returns_start() {
        let cfg = LbfgsConfig { max_iterations: 0, ..Default::default() };
        let r = maximize(&[0.3, 0.4], rosenbrock, &cfg, |_, _, _, _| {}).unwrap();
        assert_eq!(r.x, vec![0.3, 0.4]);
        assert_eq!(r.termination, Termination::MaxIterations);
    }

    #[test]
    fn failing_region_is_avoided() {
        // Concave quadratic peaking at 2, undefined beyond 1.5.
        let f = |x: &[f64]| (x[0] < 1.5).then(|| (-(x[0] - 2.0).powi(2), vec![-2.0 * (x[0] - 2.0)]));
        let cfg = LbfgsConfig { max_iterations: 30, ..Default::default() };
        let r = maximize(&[0.0], f, &cfg, |_, _, _, _| {}).unwrap();
        assert!(r.x[0] < 1.5 && r.x[0] > 1.0);
        assert!(maximize(&[2.0], f, &cfg, |_, _, _, _| {}).is_none());
    }
}
