//! Subset tree kernel dynamic program.
//!
//! For two trees the kernel is the sum of `Δ(n1, n2)` over node pairs with the
//! same production, where for a pair headed by a symbol in group `x`
//!
//! ```text
//! Δ(n1, n2) = λ_x · Π_i (α_x + Δ(c1_i, c2_i))
//! ```
//!
//! over the non-terminal children (an empty product for preterminals gives
//! `Δ = λ_x`). A child pair whose productions differ has `Δ = 0`.
//!
//! The gradients follow by the product rule:
//!
//! ```text
//! ∂Δ/∂λ = e_x · g + λ_x Σ_i g_{¬i} ∂Δ_i/∂λ
//! ∂Δ/∂α = λ_x Σ_i g_{¬i} (e_x + ∂Δ_i/∂α)
//! ```
//!
//! where `g_{¬i}` is the product of all factors except the `i`-th, computed
//! with prefix/suffix products so that `α = 0` never divides by zero.
//!
//! The matching pairs and their child links do not depend on the
//! hyperparameters, so they are compiled once into a [`PairPlan`] and then
//! re-evaluated cheaply during optimization.

use super::scheme::{GroupMap, TreeKernelHypers};
use super::KernelError;
use crate::trees::{for_each_matching_pair, ParsedTree, TreeError};

const NO_MATCH: u32 = u32::MAX;

/// Above this many groups, gradient rows are stored sparsely.
const DENSE_GROUP_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy)]
struct PlanNode {
    group: u32,
    kid_start: u32,
    kid_len: u32,
}

/// Hyperparameter-independent DP program for one tree pair: the matching
/// node pairs in children-first order, each with links to its child pairs.
#[derive(Debug, Clone, Default)]
pub struct PairPlan {
    nodes: Vec<PlanNode>,
    kids: Vec<u32>,
}

/// Kernel value with its partial derivatives per group.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeKernelEval {
    pub value: f64,
    pub d_lambda: Vec<f64>,
    pub d_alpha: Vec<f64>,
}

impl PairPlan {
    pub fn build(t1: &ParsedTree, t2: &ParsedTree, groups: &GroupMap) -> Result<Self, KernelError> {
        if t1.table_id() != t2.table_id() || t1.table_id() != groups.table_id() {
            return Err(KernelError::Tree(TreeError::MismatchedSymbolTables));
        }
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for_each_matching_pair(t1, t2, |a, b| pairs.push((a, b)));
        pairs.sort_unstable();

        let mut nodes = Vec::with_capacity(pairs.len());
        let mut kids = Vec::new();
        for &(a, b) in &pairs {
            let group = groups.group_of(t1.node(a as usize).symbol)?;
            let (ka, kb) = (t1.children(a as usize), t2.children(b as usize));
            debug_assert_eq!(ka.len(), kb.len());
            let kid_start = kids.len() as u32;
            for (&ca, &cb) in ka.iter().zip(kb) {
                let link = pairs.binary_search(&(ca, cb)).map_or(NO_MATCH, |i| i as u32);
                kids.push(link);
            }
            nodes.push(PlanNode { group, kid_start, kid_len: ka.len() as u32 });
        }
        Ok(PairPlan { nodes, kids })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn kids(&self, node: &PlanNode) -> &[u32] {
        &self.kids[node.kid_start as usize..(node.kid_start + node.kid_len) as usize]
    }

    /// Kernel value only.
    pub fn value(&self, lambda: &[f64], alpha: &[f64]) -> f64 {
        let mut delta = Vec::with_capacity(self.nodes.len());
        let mut total = 0.0;
        for node in &self.nodes {
            let g = node.group as usize;
            let mut prod = lambda[g];
            for &k in self.kids(node) {
                let d = if k == NO_MATCH { 0.0 } else { delta[k as usize] };
                prod *= alpha[g] + d;
            }
            delta.push(prod);
            total += prod;
        }
        total
    }

    /// Kernel value and exact gradients with respect to every group's λ and α,
    /// computed in the same pass.
    pub fn eval(&self, lambda: &[f64], alpha: &[f64]) -> TreeKernelEval {
        if lambda.len() <= DENSE_GROUP_LIMIT {
            self.eval_dense(lambda, alpha)
        } else {
            self.eval_sparse(lambda, alpha)
        }
    }

    fn eval_dense(&self, lambda: &[f64], alpha: &[f64]) -> TreeKernelEval {
        let k = lambda.len();
        let n = self.nodes.len();
        let mut delta = vec![0.0; n];
        let mut dl = vec![0.0; n * k];
        let mut da = vec![0.0; n * k];
        let mut out = TreeKernelEval { value: 0.0, d_lambda: vec![0.0; k], d_alpha: vec![0.0; k] };
        let mut factors = Vec::new();
        let mut others = Vec::new();

        for (p, node) in self.nodes.iter().enumerate() {
            let g = node.group as usize;
            let kids = self.kids(node);
            let prod = child_factors(kids, alpha[g], &delta, &mut factors, &mut others);
            let lam = lambda[g];
            delta[p] = lam * prod;

            let (dl_prev, dl_cur) = dl.split_at_mut(p * k);
            let (da_prev, da_cur) = da.split_at_mut(p * k);
            let (dl_row, da_row) = (&mut dl_cur[..k], &mut da_cur[..k]);
            dl_row[g] += prod;
            let mut others_sum = 0.0;
            for (i, &c) in kids.iter().enumerate() {
                let w = lam * others[i];
                others_sum += others[i];
                if c == NO_MATCH {
                    continue;
                }
                let c = c as usize;
                for (r, v) in dl_row.iter_mut().zip(&dl_prev[c * k..(c + 1) * k]) {
                    *r += w * v;
                }
                for (r, v) in da_row.iter_mut().zip(&da_prev[c * k..(c + 1) * k]) {
                    *r += w * v;
                }
            }
            da_row[g] += lam * others_sum;

            out.value += delta[p];
            for (o, v) in out.d_lambda.iter_mut().zip(dl_row.iter()) {
                *o += v;
            }
            for (o, v) in out.d_alpha.iter_mut().zip(da_row.iter()) {
                *o += v;
            }
        }
        out
    }

    /// Same recursion with gradient rows kept as sorted sparse lists; a row
    /// only has entries for groups that occur below the pair.
    fn eval_sparse(&self, lambda: &[f64], alpha: &[f64]) -> TreeKernelEval {
        let k = lambda.len();
        let n = self.nodes.len();
        let mut delta = vec![0.0; n];
        let mut rows: Vec<(u32, u32)> = Vec::with_capacity(n);
        let mut arena: Vec<(u32, f64, f64)> = Vec::new();
        let mut acc_l = vec![0.0; k];
        let mut acc_a = vec![0.0; k];
        let mut seen = vec![false; k];
        let mut touched: Vec<u32> = Vec::new();
        let mut out = TreeKernelEval { value: 0.0, d_lambda: vec![0.0; k], d_alpha: vec![0.0; k] };
        let mut factors = Vec::new();
        let mut others = Vec::new();

        for (p, node) in self.nodes.iter().enumerate() {
            let g = node.group as usize;
            let kids = self.kids(node);
            let prod = child_factors(kids, alpha[g], &delta, &mut factors, &mut others);
            let lam = lambda[g];
            delta[p] = lam * prod;

            touch(g as u32, &mut seen, &mut touched);
            acc_l[g] += prod;
            let mut others_sum = 0.0;
            for (i, &c) in kids.iter().enumerate() {
                others_sum += others[i];
                if c == NO_MATCH {
                    continue;
                }
                let w = lam * others[i];
                let (start, len) = rows[c as usize];
                for &(grp, vl, va) in &arena[start as usize..(start + len) as usize] {
                    touch(grp, &mut seen, &mut touched);
                    acc_l[grp as usize] += w * vl;
                    acc_a[grp as usize] += w * va;
                }
            }
            acc_a[g] += lam * others_sum;

            touched.sort_unstable();
            let start = arena.len() as u32;
            for &grp in &touched {
                let i = grp as usize;
                arena.push((grp, acc_l[i], acc_a[i]));
                out.d_lambda[i] += acc_l[i];
                out.d_alpha[i] += acc_a[i];
                acc_l[i] = 0.0;
                acc_a[i] = 0.0;
                seen[i] = false;
            }
            rows.push((start, touched.len() as u32));
            touched.clear();
            out.value += delta[p];
        }
        out
    }
}

fn touch(g: u32, seen: &mut [bool], touched: &mut Vec<u32>) {
    if !seen[g as usize] {
        seen[g as usize] = true;
        touched.push(g);
    }
}

/// Fills `factors[i] = α + Δ_i` and `others[i] = Π_{j≠i} factors[j]`, and
/// returns the full product.
fn child_factors(kids: &[u32], alpha: f64, delta: &[f64], factors: &mut Vec<f64>, others: &mut Vec<f64>) -> f64 {
    factors.clear();
    others.clear();
    let mut prefix = 1.0;
    for &c in kids {
        let d = if c == NO_MATCH { 0.0 } else { delta[c as usize] };
        let f = alpha + d;
        factors.push(f);
        others.push(prefix);
        prefix *= f;
    }
    let mut suffix = 1.0;
    for i in (0..kids.len()).rev() {
        others[i] *= suffix;
        suffix *= factors[i];
    }
    prefix
}

/// Unnormalized subset tree kernel between two trees with its exact
/// gradients with respect to each group's λ and α.
pub fn sstk_delta_with_grads(
    t1: &ParsedTree,
    t2: &ParsedTree,
    hypers: &TreeKernelHypers,
    groups: &GroupMap,
) -> Result<TreeKernelEval, KernelError> {
    hypers.validate(groups.group_count())?;
    let plan = PairPlan::build(t1, t2, groups)?;
    Ok(plan.eval(&hypers.lambda, &hypers.alpha))
}

/// Unnormalized kernel value without gradients.
pub fn tree_kernel(
    t1: &ParsedTree,
    t2: &ParsedTree,
    hypers: &TreeKernelHypers,
    groups: &GroupMap,
) -> Result<f64, KernelError> {
    hypers.validate(groups.group_count())?;
    Ok(PairPlan::build(t1, t2, groups)?.value(&hypers.lambda, &hypers.alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::TyingScheme;
    use crate::trees::{parse_bracketed, SymbolTable};

    fn three_node() -> (SymbolTable, ParsedTree) {
        let mut t = SymbolTable::new();
        let tree = parse_bracketed("(S (A a) (B b))", &mut t).unwrap();
        (t, tree)
    }

    #[test]
    fn three_node_tree_self_kernel_is_six() {
        let (t, tree) = three_node();
        let g = TyingScheme::tied().resolve(&t);
        let e = sstk_delta_with_grads(&tree, &tree, &TreeKernelHypers::uniform(1, 1.0, 1.0), &g).unwrap();
        assert_eq!(e.value, 6.0);
        // k = 2λ + λ(α+λ)²
        assert_eq!(e.d_lambda, vec![10.0]);
        assert_eq!(e.d_alpha, vec![4.0]);
    }

    #[test]
    fn closed_form_at_other_values() {
        let (t, tree) = three_node();
        let g = TyingScheme::tied().resolve(&t);
        let (l, a) = (0.3_f64, 0.7_f64);
        let e = sstk_delta_with_grads(&tree, &tree, &TreeKernelHypers::uniform(1, l, a), &g).unwrap();
        let s = a + l;
        assert!((e.value - (2.0 * l + l * s * s)).abs() < 1e-15);
        assert!((e.d_lambda[0] - (2.0 + s * s + 2.0 * l * s)).abs() < 1e-14);
        assert!((e.d_alpha[0] - 2.0 * l * s).abs() < 1e-15);
    }

    #[test]
    fn symbol_aware_lambda_s_half() {
        let (t, tree) = three_node();
        let g = TyingScheme::full(&t).resolve(&t);
        // groups: A, B, S, other
        let h = TreeKernelHypers::new(vec![1.0, 1.0, 0.5, 1.0], vec![1.0; 4]);
        let e = sstk_delta_with_grads(&tree, &tree, &h, &g).unwrap();
        assert_eq!(e.value, 4.0);
        assert_eq!(e.d_lambda[2], 4.0);
        assert_eq!(e.d_lambda[3], 0.0);
    }

    #[test]
    fn subtree_kernel_at_alpha_zero() {
        let (t, tree) = three_node();
        let g = TyingScheme::tied().resolve(&t);
        let e = sstk_delta_with_grads(&tree, &tree, &TreeKernelHypers::uniform(1, 1.0, 0.0), &g).unwrap();
        assert_eq!(e.value, 3.0);
        // ∂/∂α of λ(α+λ)² at α=0 is 2λ² = 2
        assert_eq!(e.d_alpha, vec![2.0]);
    }

    #[test]
    fn disjoint_trees_give_zero() {
        let mut t = SymbolTable::new();
        let a = parse_bracketed("(S (A a) (B b))", &mut t).unwrap();
        let b = parse_bracketed("(X (Y y))", &mut t).unwrap();
        let g = TyingScheme::tied().resolve(&t);
        let e = sstk_delta_with_grads(&a, &b, &TreeKernelHypers::uniform(1, 0.4, 1.0), &g).unwrap();
        assert_eq!(e, TreeKernelEval { value: 0.0, d_lambda: vec![0.0], d_alpha: vec![0.0] });
    }

    #[test]
    fn dense_and_sparse_paths_agree() {
        let mut t = SymbolTable::new();
        let syms = ["S", "NP", "VP", "PP", "DT", "NN", "VB", "IN", "JJ", "ADJP", "RB"];
        for s in syms {
            t.intern_symbol(s);
        }
        let a = parse_bracketed(
            "(S (NP (DT the) (JJ old) (NN man)) (VP (VB saw) (NP (DT the) (NN dog)) (PP (IN in) (NP (DT the) (NN park)))))",
            &mut t,
        )
        .unwrap();
        let b = parse_bracketed(
            "(S (NP (DT the) (NN dog)) (VP (VB saw) (NP (DT the) (ADJP (RB very) (JJ old)) (NN man))))",
            &mut t,
        )
        .unwrap();
        let g = TyingScheme::full(&t).resolve(&t);
        let k = g.group_count();
        assert!(k > DENSE_GROUP_LIMIT);
        let lambda: Vec<f64> = (0..k).map(|i| 0.2 + 0.05 * i as f64).collect();
        let alpha: Vec<f64> = (0..k).map(|i| 0.1 * (i % 4) as f64).collect();
        let plan = PairPlan::build(&a, &b, &g).unwrap();
        let d = plan.eval_dense(&lambda, &alpha);
        let s = plan.eval_sparse(&lambda, &alpha);
        assert!((d.value - s.value).abs() < 1e-14);
        assert!((plan.value(&lambda, &alpha) - d.value).abs() < 1e-14);
        for i in 0..k {
            assert!((d.d_lambda[i] - s.d_lambda[i]).abs() < 1e-13);
            assert!((d.d_alpha[i] - s.d_alpha[i]).abs() < 1e-13);
        }
    }
}
