mod common;

use common::*;
use proptest::prelude::*;
use treegp::kernels::oracle::brute_force_kernel;
use treegp::kernels::{
    normalize_with_grads, rbf_with_grads, sstk_delta_with_grads, tree_kernel, GramEngine, Input, KernelSpec,
    RbfHypers, TreeKernelHypers, TyingScheme,
};
use treegp::trees::{parse_bracketed, SymbolTable};

fn three_node() -> (SymbolTable, treegp::trees::ParsedTree) {
    let mut t = SymbolTable::new();
    let tree = parse_bracketed("(S (A a) (B b))", &mut t).unwrap();
    (t, tree)
}

#[test]
fn three_node_tree_matches_closed_form() {
    let (table, t) = three_node();
    let g = TyingScheme::tied().resolve(&table);
    for &(l, a) in &[(1.0, 1.0), (0.3, 0.7), (0.05, 2.0), (0.9, 0.0)] {
        let e = sstk_delta_with_grads(&t, &t, &TreeKernelHypers::uniform(1, l, a), &g).unwrap();
        let closed = 2.0 * l + l * (a + l) * (a + l);
        assert!(rel_err(e.value, closed) < 1e-14, "{l} {a}");
        let dl = 2.0 + (a + l) * (a + l) + 2.0 * l * (a + l);
        let da = 2.0 * l * (a + l);
        assert!(rel_err(e.d_lambda[0], dl) < 1e-14);
        assert!(rel_err(e.d_alpha[0], da) < 1e-14);
    }
    let e = sstk_delta_with_grads(&t, &t, &TreeKernelHypers::uniform(1, 1.0, 1.0), &g).unwrap();
    assert_eq!((e.value, e.d_lambda[0], e.d_alpha[0]), (6.0, 10.0, 4.0));
}

#[test]
fn three_node_tree_without_alpha_counts_lexicalized_fragments() {
    let (table, t) = three_node();
    let g = TyingScheme::tied().resolve(&table);
    assert_eq!(tree_kernel(&t, &t, &TreeKernelHypers::uniform(1, 1.0, 0.0), &g).unwrap(), 3.0);
}

#[test]
fn three_node_tree_full_scheme_with_half_lambda_on_root() {
    let (table, t) = three_node();
    let scheme = TyingScheme::full(&table);
    let g = scheme.resolve(&table);
    let names = scheme.group_names();
    let lambda: Vec<f64> = names.iter().map(|n| if n == "S" { 0.5 } else { 1.0 }).collect();
    let h = TreeKernelHypers::new(lambda, vec![1.0; names.len()]);
    assert_eq!(tree_kernel(&t, &t, &h, &g).unwrap(), 4.0);
    assert_eq!(brute_force_kernel(&t, &t, &h, &g, 16).unwrap(), 4.0);
}

#[test]
fn normalized_self_kernel_is_one_with_zero_gradient() {
    let (table, t) = three_node();
    let spec = KernelSpec::tree(TyingScheme::tied()).normalized(true);
    let engine = GramEngine::uncached(&spec, vec![Input::tree(t)], &table).unwrap();
    let r = engine.gram_with_grads(&[0.3, 0.8]).unwrap();
    assert_eq!(r.k[(0, 0)], 1.0);
    assert!(r.dk.iter().all(|d| d[(0, 0)] == 0.0));
}

#[test]
fn normalization_formula_on_known_values() {
    let (v, g) = normalize_with_grads(2.0, 4.0, 1.0, &[1.0], &[0.0], &[0.0]).unwrap();
    assert_eq!(v, 1.0);
    assert_eq!(g, vec![0.5]);
    assert!(normalize_with_grads(1.0, 0.0, 1.0, &[0.0], &[0.0], &[0.0]).is_err());
}

#[test]
fn rbf_known_value_and_gradients() {
    let h = RbfHypers { variance: 2.0, lengthscale: 1.0 };
    let (k, dv, dl) = rbf_with_grads(&[0.0, 0.0], &[1.0, 1.0], h).unwrap();
    let e = (-1.0f64).exp();
    assert!(rel_err(k, 2.0 * e) < 1e-15);
    assert!(rel_err(dv, e) < 1e-15);
    assert!(rel_err(dl, 2.0 * e * 2.0) < 1e-15);
    assert!(rbf_with_grads(&[0.0], &[1.0, 2.0], h).is_err());
}

#[test]
fn unknown_symbol_in_explicit_scheme_without_catch_all_is_an_error() {
    let (table, t) = three_node();
    let scheme = TyingScheme::explicit(vec![("S".into(), vec!["S".into()])], None);
    let g = scheme.resolve(&table);
    let err = tree_kernel(&t, &t, &TreeKernelHypers::uniform(1, 1.0, 1.0), &g).unwrap_err();
    assert_eq!(err.code(), "unknown-symbol");
}

fn pair(seed: u64) -> (SymbolTable, treegp::trees::ParsedTree, treegp::trees::ParsedTree) {
    let mut r = rng(seed);
    let mut table = full_table();
    let a = random_tree(&mut r, &mut table, 8);
    let b = random_tree(&mut r, &mut table, 8);
    (table, a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recursion_matches_fragment_enumeration(seed in any::<u64>(), full in any::<bool>(), alpha in prop::sample::select(vec![0.0, 0.5, 1.0])) {
        let (table, a, b) = pair(seed);
        let scheme = if full { TyingScheme::full(&table) } else { TyingScheme::tied() };
        let g = scheme.resolve(&table);
        let mut r = rng(seed ^ 1);
        let h = random_hypers(&mut r, g.group_count(), 0.0);
        let h = TreeKernelHypers::new(h.lambda, vec![alpha; g.group_count()]);
        let fast = tree_kernel(&a, &b, &h, &g).unwrap();
        let slow = brute_force_kernel(&a, &b, &h, &g, 64).unwrap();
        prop_assert!(rel_err(fast, slow) <= 1e-10, "{} vs {}", fast, slow);
    }

    #[test]
    fn kernel_is_symmetric_and_nonnegative(seed in any::<u64>()) {
        let (table, a, b) = pair(seed);
        let g = TyingScheme::full(&table).resolve(&table);
        let mut r = rng(seed ^ 2);
        let h = random_hypers(&mut r, g.group_count(), 0.0);
        let ab = tree_kernel(&a, &b, &h, &g).unwrap();
        let ba = tree_kernel(&b, &a, &h, &g).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!(rel_err(ab, ba) <= 1e-14);
    }

    #[test]
    fn tied_full_scheme_reduces_to_sstk(seed in any::<u64>(), lambda in 0.01f64..1.0, alpha in 0.0f64..2.0) {
        let (table, a, b) = pair(seed);
        let tied = TyingScheme::tied().resolve(&table);
        let full = TyingScheme::full(&table).resolve(&table);
        let x = tree_kernel(&a, &b, &TreeKernelHypers::uniform(1, lambda, alpha), &tied).unwrap();
        let y = tree_kernel(&a, &b, &TreeKernelHypers::uniform(full.group_count(), lambda, alpha), &full).unwrap();
        prop_assert!(rel_err(x, y) <= 1e-12);
    }

    #[test]
    fn normalized_gram_is_bounded_and_positive_semidefinite(seed in any::<u64>(), lambda in 0.05f64..1.0, alpha in 0.1f64..1.5) {
        let mut r = rng(seed);
        let mut table = full_table();
        let inputs = random_inputs(&mut r, &mut table, 8, 8);
        let spec = KernelSpec::tree(TyingScheme::tied()).normalized(true);
        let k = GramEngine::new(&spec, inputs, &table).unwrap().gram(&[lambda, alpha]).unwrap();
        for i in 0..8 {
            prop_assert_eq!(k[(i, i)], 1.0);
            for j in 0..8 {
                prop_assert!(k[(i, j)] >= 0.0 && k[(i, j)] <= 1.0 + 1e-12);
                prop_assert_eq!(k[(i, j)], k[(j, i)]);
            }
        }
        let eig = k.symmetric_eigenvalues();
        prop_assert!(eig.min() >= -1e-10 * eig.max());
    }

    #[test]
    fn tree_gradients_match_finite_differences(seed in any::<u64>()) {
        let (table, a, b) = pair(seed);
        let g = TyingScheme::full(&table).resolve(&table);
        let n = g.group_count();
        let mut r = rng(seed ^ 3);
        let h = random_hypers(&mut r, n, 0.1);
        let e = sstk_delta_with_grads(&a, &b, &h, &g).unwrap();
        let x: Vec<f64> = h.lambda.iter().chain(&h.alpha).copied().collect();
        let fd = central_diff(&x, 1e-5, |p| {
            tree_kernel(&a, &b, &TreeKernelHypers::new(p[..n].to_vec(), p[n..].to_vec()), &g).unwrap()
        });
        let an: Vec<f64> = e.d_lambda.iter().chain(&e.d_alpha).copied().collect();
        prop_assert!(vec_rel_err(&an, &fd) <= 1e-6);
    }

    #[test]
    fn cached_views_and_cross_terms_agree(seed in any::<u64>(), lambda in 0.05f64..1.0, alpha in 0.1f64..1.5) {
        let mut r = rng(seed);
        let mut table = full_table();
        let inputs = random_inputs(&mut r, &mut table, 7, 6);
        let spec = KernelSpec::Sum {
            children: vec![
                KernelSpec::tree(TyingScheme::tied()).normalized(true),
                KernelSpec::tree(TyingScheme::tied()).normalized(false),
            ],
        };
        let theta = [lambda, alpha, lambda * 0.5, alpha];
        let cached = GramEngine::new(&spec, inputs.clone(), &table).unwrap();
        let plain = GramEngine::uncached(&spec, inputs.clone(), &table).unwrap();
        let k = cached.gram(&theta).unwrap();
        let k2 = plain.gram(&theta).unwrap();
        prop_assert!((&k - &k2).amax() <= 1e-12 * k.amax());

        let rows = [5usize, 1, 3];
        let view = cached.view(&rows).gram(&theta).unwrap();
        for (i, &a) in rows.iter().enumerate() {
            for (j, &b) in rows.iter().enumerate() {
                prop_assert!(rel_err(view[(i, j)], k[(a, b)]) <= 1e-14);
            }
        }
        let cross = cached.cross_inputs(&inputs[..3], &theta).unwrap();
        for i in 0..3 {
            prop_assert!(rel_err(cross.diag[i], k[(i, i)]) <= 1e-12);
            for j in 0..7 {
                prop_assert!(rel_err(cross.k[(i, j)], k[(i, j)]) <= 1e-12);
            }
        }
    }
}
