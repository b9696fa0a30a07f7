mod common;

use common::*;
use rand::Rng;
use treegp::gp::GpModel;
use treegp::kernels::{KernelSpec, TyingScheme};
use treegp::opt::{fold_assignment, grid_search, maximize, optimize, GridSpec, LbfgsConfig, OptimizeConfig};
use treegp::synth::{sample_prior_targets, TreePool, TreebankConfig};

fn prior_model(n: usize, seed: u64) -> GpModel {
    let pool = TreePool::generated(&TreebankConfig { size: n, seed, max_depth: 4 }).unwrap();
    let spec = KernelSpec::tree(TyingScheme::tied()).normalized(true);
    let y = sample_prior_targets(&pool.inputs(), &spec, &[0.3, 1.0], 0.05, seed, &pool.table).unwrap();
    GpModel::new(&spec, pool.inputs(), y, &pool.table).unwrap()
}

#[test]
fn lbfgs_maximizes_a_concave_quadratic() {
    let target = [1.5, -0.5, 3.0];
    let out = maximize(
        &[0.0, 0.0, 0.0],
        |x| {
            let v = -x.iter().zip(&target).map(|(a, b)| (a - b) * (a - b) * 2.0).sum::<f64>();
            Some((v, x.iter().zip(&target).map(|(a, b)| -4.0 * (a - b)).collect()))
        },
        &LbfgsConfig::default(),
        |_, _, _, _| {},
    )
    .unwrap();
    for (x, t) in out.x.iter().zip(&target) {
        assert!((x - t).abs() < 1e-6);
    }
}

#[test]
fn optimization_never_lowers_the_likelihood_of_the_start() {
    let model = prior_model(60, 3);
    let cfg = OptimizeConfig { restarts: 3, seed: 9, ..Default::default() };
    let out = optimize(&model, &cfg).unwrap();
    for r in &out.trace.restarts {
        let start = r.iterations[0].lml;
        let end = r.final_lml.unwrap();
        assert!(end >= start - 1e-9, "{start} -> {end}");
        for w in r.iterations.windows(2) {
            assert!(w[1].lml >= w[0].lml - 1e-9);
        }
    }
    let best = out.trace.restarts.iter().filter_map(|r| r.final_lml).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(out.lml, best);
    let refit = model.fit(&out.theta, out.noise).unwrap().log_marginal_likelihood().total;
    assert!(rel_err(refit, out.lml) < 1e-10);
}

#[test]
fn optimization_is_deterministic_for_a_seed() {
    let model = prior_model(40, 5);
    let cfg = OptimizeConfig { restarts: 3, seed: 1, ..Default::default() };
    let a = optimize(&model, &cfg).unwrap();
    let b = optimize(&model, &cfg).unwrap();
    assert_eq!((a.theta, a.noise, a.lml), (b.theta, b.noise, b.lml));
}

#[test]
fn grid_picks_lowest_cv_rmse_earliest_on_ties() {
    let model = prior_model(45, 7);
    let grid = GridSpec::new(vec![vec![0.1, 0.5], vec![1.0, 1.0]], vec![0.01, 0.1]);
    let out = grid_search(&model, &grid, 2).unwrap();
    assert_eq!(out.evaluations.len(), 8);
    let best = out.evaluations.iter().filter_map(|e| e.cv_rmse).fold(f64::INFINITY, f64::min);
    let first = out.evaluations.iter().position(|e| e.cv_rmse == Some(best)).unwrap();
    assert_eq!(out.chosen, first);
    assert_eq!(out.theta, out.evaluations[first].theta);
    // α duplicated, so points 0..4 and 4..8 mirror each other in pairs
    assert_eq!(out.evaluations[0].cv_rmse, out.evaluations[2].cv_rmse);
}

#[test]
fn folds_partition_rows() {
    let mut r = rng(0);
    for _ in 0..20 {
        let n = r.gen_range(3..50);
        let k = r.gen_range(2..=n.min(7));
        let folds = fold_assignment(n, k, r.gen());
        assert_eq!(folds.len(), k);
        let mut all: Vec<usize> = folds.concat();
        all.sort();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}
