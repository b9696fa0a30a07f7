use treegp::kernels::{KernelSpec, TyingScheme};
use treegp::synth::{
    generate_treebank, run_recovery, sample_prior_targets, GeneratingModel, PriorSampler, RecoveryConfig, TreePool,
    TreebankConfig,
};
use treegp::trees::{parse_bracketed, SymbolTable};

#[test]
fn treebank_is_seeded_and_parses() {
    let cfg = TreebankConfig { size: 50, seed: 4, max_depth: 4 };
    let a = generate_treebank(&cfg);
    assert_eq!(a, generate_treebank(&cfg));
    assert_ne!(a, generate_treebank(&TreebankConfig { seed: 5, ..cfg.clone() }));
    let mut t = SymbolTable::new();
    for line in &a {
        let tree = parse_bracketed(line, &mut t).unwrap();
        assert!(line.starts_with("(S "));
        assert!(tree.token_count() >= 2);
    }
}

#[test]
fn prior_samples_are_reproducible_and_respect_duplicates() {
    let pool = TreePool::from_text("(S (A a) (B b))\n(S (A a) (B c))\n(S (A a) (B b))\n", "dup".into()).unwrap();
    let spec = KernelSpec::tree(TyingScheme::tied()).normalized(true);
    let sampler = PriorSampler::new(&pool.inputs(), &spec, &[0.5, 1.0], &pool.table).unwrap();
    assert_eq!(sampler.distinct_inputs(), 2);
    let y = sampler.sample(0.0, 8);
    assert_eq!(y[0], y[2]);
    assert_ne!(y[0], y[1]);
    assert_eq!(y, sampler.sample(0.0, 8));
    let noisy = sampler.sample(0.01, 8);
    assert_ne!(noisy[0], noisy[2]);
}

#[test]
fn prior_sample_variance_matches_kernel_diagonal() {
    let pool = TreePool::from_text("(S (A a) (B b))\n(S (C c))\n", "two".into()).unwrap();
    let spec = KernelSpec::tree(TyingScheme::tied()).normalized(false);
    let n = 4000;
    let mut sum_sq = [0.0; 2];
    for seed in 0..n {
        let y = sample_prior_targets(&pool.inputs(), &spec, &[1.0, 1.0], 0.0, seed, &pool.table).unwrap();
        sum_sq[0] += y[0] * y[0];
        sum_sq[1] += y[1] * y[1];
    }
    // k(t,t) is 6 for the first tree and 3 for the second; trees share no production
    let var = [sum_sq[0] / n as f64, sum_sq[1] / n as f64];
    assert!((var[0] / 6.0 - 1.0).abs() < 0.1, "{var:?}");
    assert!((var[1] / 3.0 - 1.0).abs() < 0.1, "{var:?}");
}

#[test]
fn small_recovery_run_is_deterministic_and_summarized() {
    let pool = TreePool::generated(&TreebankConfig { size: 120, seed: 2, max_depth: 4 }).unwrap();
    let cfg = RecoveryConfig { test_size: 40, sizes: vec![20, 40], repetitions: 2, restarts: 2, seed: 3, ..Default::default() };
    let a = run_recovery(&pool, &cfg).unwrap();
    let b = run_recovery(&pool, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.records.len(), 4);
    assert_eq!(a.param_names, vec!["lambda.all", "alpha.all", "noise"]);
    for s in &a.summaries {
        for p in &s.params {
            assert!(p.log10_q1 <= p.log10_median && p.log10_median <= p.log10_q3);
        }
    }
    let too_big = RecoveryConfig { test_size: 100, sizes: vec![40], ..cfg };
    assert_eq!(run_recovery(&pool, &too_big).unwrap_err().code(), "invalid-config");
}

#[test]
fn generating_models_have_matching_parameter_counts() {
    for g in [GeneratingModel::sstk(), GeneratingModel::sasstk_s()] {
        assert_eq!(g.theta.len(), g.spec.param_count());
    }
    assert_eq!(GeneratingModel::sasstk_s().spec.param_names(), vec!["lambda.S", "lambda.other", "alpha.S", "alpha.other"]);
}
