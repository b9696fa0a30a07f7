//! Gram matrices and their hyperparameter gradients for composed kernels.
//!
//! A [`GramEngine`] owns the inputs and, for every tree leaf, the compiled
//! [`PairPlan`]s of all input pairs. Plans do not depend on hyperparameters,
//! so repeated evaluations during optimization only run the arithmetic of the
//! dynamic program. Engines can be restricted to a subset of rows with
//! [`GramEngine::view`] without recompiling anything.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::delta::PairPlan;
use super::normalize::normalize_with_grads;
use super::rbf::{rbf_with_grads, RbfHypers};
use super::scheme::{AlphaMode, GroupMap};
use super::spec::{Input, KernelSpec};
use super::KernelError;
use crate::trees::{ParsedTree, SymbolTable, TreeError};

/// Gram matrix with one gradient matrix per flattened hyperparameter.
#[derive(Debug, Clone)]
pub struct GramResult {
    pub k: DMatrix<f64>,
    pub dk: Vec<DMatrix<f64>>,
}

/// Kernel between new points (rows) and the engine's points (columns), plus
/// each new point's kernel with itself.
#[derive(Debug, Clone)]
pub struct CrossGram {
    pub k: DMatrix<f64>,
    pub diag: DVector<f64>,
}

struct TreeLeaf {
    slot: usize,
    groups: GroupMap,
    normalized: bool,
    alpha_free: bool,
    offset: usize,
    self_plans: Vec<PairPlan>,
    pair_plans: Option<Vec<PairPlan>>,
}

enum Leaf {
    Tree(TreeLeaf),
    Rbf { dim: usize, offset: usize },
}

struct Base {
    spec: KernelSpec,
    inputs: Vec<Input>,
    leaves: Vec<Leaf>,
    param_count: usize,
}

#[derive(Clone)]
pub struct GramEngine {
    base: Arc<Base>,
    rows: Vec<usize>,
}

#[derive(Clone, Copy)]
enum Item<'a> {
    Base(usize),
    Ext(&'a Input),
}

/// Elementwise kernel block with optional gradient blocks.
struct Block {
    k: DMatrix<f64>,
    dk: Vec<DMatrix<f64>>,
}

fn tri_index(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b);
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

impl GramEngine {
    /// Compiles the kernel over `inputs`, caching pair plans for every pair.
    pub fn new(spec: &KernelSpec, inputs: Vec<Input>, table: &SymbolTable) -> Result<Self, KernelError> {
        Self::build(spec, inputs, table, true)
    }

    /// Like [`GramEngine::new`] but builds pair plans on demand. Suited to a
    /// single evaluation over many inputs.
    pub fn uncached(spec: &KernelSpec, inputs: Vec<Input>, table: &SymbolTable) -> Result<Self, KernelError> {
        Self::build(spec, inputs, table, false)
    }

    fn build(spec: &KernelSpec, inputs: Vec<Input>, table: &SymbolTable, cache: bool) -> Result<Self, KernelError> {
        let n = inputs.len();
        let mut leaves = Vec::new();
        let mut offset = 0;
        for leaf in spec.leaves() {
            match leaf {
                KernelSpec::Tree { slot, scheme, normalized, alpha } => {
                    let groups = scheme.resolve(table);
                    for input in &inputs {
                        check_tree_input(input, *slot, &groups)?;
                    }
                    let self_plans = inputs
                        .par_iter()
                        .map(|x| PairPlan::build(&x.trees[*slot], &x.trees[*slot], &groups))
                        .collect::<Result<Vec<_>, _>>()?;
                    let pair_plans = if cache {
                        let pairs: Vec<(usize, usize)> =
                            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
                        Some(
                            pairs
                                .par_iter()
                                .map(|&(a, b)| PairPlan::build(&inputs[a].trees[*slot], &inputs[b].trees[*slot], &groups))
                                .collect::<Result<Vec<_>, _>>()?,
                        )
                    } else {
                        None
                    };
                    leaves.push(Leaf::Tree(TreeLeaf {
                        slot: *slot,
                        groups,
                        normalized: *normalized,
                        alpha_free: *alpha == AlphaMode::Free,
                        offset,
                        self_plans,
                        pair_plans,
                    }));
                }
                KernelSpec::Rbf { dim } => {
                    for input in &inputs {
                        check_dense_input(input, *dim)?;
                    }
                    leaves.push(Leaf::Rbf { dim: *dim, offset });
                }
                _ => unreachable!("leaves() yields leaves only"),
            }
            offset += leaf.leaf_param_count();
        }
        let base = Base { spec: spec.clone(), inputs, leaves, param_count: offset };
        Ok(GramEngine { base: Arc::new(base), rows: (0..n).collect() })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.base.spec
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn param_count(&self) -> usize {
        self.base.param_count
    }

    /// Inputs visible through this view, in row order.
    pub fn inputs(&self) -> impl Iterator<Item = &Input> {
        self.rows.iter().map(move |&r| &self.base.inputs[r])
    }

    /// Restricts the engine to `rows` (indices into this view). Shares the
    /// compiled plans.
    pub fn view(&self, rows: &[usize]) -> GramEngine {
        GramEngine { base: Arc::clone(&self.base), rows: rows.iter().map(|&r| self.rows[r]).collect() }
    }

    pub fn shares_base(&self, other: &GramEngine) -> bool {
        Arc::ptr_eq(&self.base, &other.base)
    }

    pub fn gram(&self, theta: &[f64]) -> Result<DMatrix<f64>, KernelError> {
        self.check_theta(theta)?;
        let items: Vec<Item> = self.rows.iter().map(|&r| Item::Base(r)).collect();
        let blocks = self
            .base
            .leaves
            .iter()
            .map(|leaf| self.leaf_symmetric(leaf, theta, &items, false))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(compose(&self.base.spec, &mut blocks.into_iter()).k)
    }

    pub fn gram_with_grads(&self, theta: &[f64]) -> Result<GramResult, KernelError> {
        self.check_theta(theta)?;
        let items: Vec<Item> = self.rows.iter().map(|&r| Item::Base(r)).collect();
        let blocks = self
            .base
            .leaves
            .iter()
            .map(|leaf| self.leaf_symmetric(leaf, theta, &items, true))
            .collect::<Result<Vec<_>, _>>()?;
        let b = compose(&self.base.spec, &mut blocks.into_iter());
        Ok(GramResult { k: b.k, dk: b.dk })
    }

    /// Kernel between another view of the same inputs (rows) and this view
    /// (columns). Uses cached plans.
    pub fn cross_view(&self, other: &GramEngine, theta: &[f64]) -> Result<CrossGram, KernelError> {
        if !self.shares_base(other) {
            let inputs: Vec<Input> = other.inputs().cloned().collect();
            return self.cross_inputs(&inputs, theta);
        }
        let items: Vec<Item> = other.rows.iter().map(|&r| Item::Base(r)).collect();
        self.cross_items(&items, theta)
    }

    /// Kernel between new inputs (rows) and this view (columns). New trees
    /// must come from the engine's symbol table; symbols interned after the
    /// engine was built fall into the catch-all group.
    pub fn cross_inputs(&self, inputs: &[Input], theta: &[f64]) -> Result<CrossGram, KernelError> {
        for leaf in &self.base.leaves {
            for input in inputs {
                match leaf {
                    Leaf::Tree(t) => check_tree_input(input, t.slot, &t.groups)?,
                    Leaf::Rbf { dim, .. } => check_dense_input(input, *dim)?,
                }
            }
        }
        let items: Vec<Item> = inputs.iter().map(Item::Ext).collect();
        self.cross_items(&items, theta)
    }

    fn cross_items(&self, rows: &[Item], theta: &[f64]) -> Result<CrossGram, KernelError> {
        self.check_theta(theta)?;
        let cols: Vec<Item> = self.rows.iter().map(|&r| Item::Base(r)).collect();
        let mut cross = Vec::with_capacity(self.base.leaves.len());
        let mut diag = Vec::with_capacity(self.base.leaves.len());
        for leaf in &self.base.leaves {
            let (c, d) = self.leaf_cross(leaf, theta, rows, &cols)?;
            cross.push(Block { k: c, dk: Vec::new() });
            diag.push(Block { k: d, dk: Vec::new() });
        }
        let k = compose(&self.base.spec, &mut cross.into_iter()).k;
        let d = compose(&self.base.spec, &mut diag.into_iter()).k;
        Ok(CrossGram { k, diag: d.column(0).into_owned() })
    }

    fn check_theta(&self, theta: &[f64]) -> Result<(), KernelError> {
        if theta.len() != self.base.param_count {
            return Err(KernelError::HyperCount { expected: self.base.param_count, got: theta.len() });
        }
        for leaf in &self.base.leaves {
            match leaf {
                Leaf::Tree(t) => {
                    let (lambda, alpha) = t.hypers(theta);
                    super::TreeKernelHypers::new(lambda, alpha).validate(t.groups.group_count())?;
                }
                Leaf::Rbf { offset, .. } => {
                    let (v, l) = (theta[*offset], theta[offset + 1]);
                    if !(v > 0.0 && l > 0.0 && v.is_finite() && l.is_finite()) {
                        return Err(KernelError::InvalidHyper(format!(
                            "rbf variance and lengthscale must be positive, got {v}, {l}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn tree_of<'a>(&'a self, item: Item<'a>, slot: usize) -> &'a ParsedTree {
        match item {
            Item::Base(i) => &self.base.inputs[i].trees[slot],
            Item::Ext(x) => &x.trees[slot],
        }
    }

    fn features_of<'a>(&'a self, item: Item<'a>) -> &'a [f64] {
        let input = match item {
            Item::Base(i) => &self.base.inputs[i],
            Item::Ext(x) => x,
        };
        input.features.as_deref().unwrap_or(&[])
    }

    /// Runs `f` on the plan for the item pair, building it if not cached.
    fn with_plan<R>(&self, leaf: &TreeLeaf, a: Item, b: Item, f: impl FnOnce(&PairPlan) -> R) -> Result<R, KernelError> {
        match (a, b) {
            (Item::Base(x), Item::Base(y)) if x == y => return Ok(f(&leaf.self_plans[x])),
            (Item::Base(x), Item::Base(y)) => {
                if let Some(plans) = &leaf.pair_plans {
                    let n = self.base.inputs.len();
                    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
                    return Ok(f(&plans[tri_index(n, lo, hi)]));
                }
            }
            _ => {}
        }
        let plan = PairPlan::build(self.tree_of(a, leaf.slot), self.tree_of(b, leaf.slot), &leaf.groups)?;
        Ok(f(&plan))
    }

    fn self_plan_value(&self, leaf: &TreeLeaf, item: Item, lambda: &[f64], alpha: &[f64]) -> Result<f64, KernelError> {
        self.with_plan(leaf, item, item, |p| p.value(lambda, alpha))
    }

    fn leaf_symmetric(&self, leaf: &Leaf, theta: &[f64], items: &[Item], grads: bool) -> Result<Block, KernelError> {
        let n = items.len();
        let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let (values, grad_rows, p) = match leaf {
            Leaf::Tree(t) => {
                let (lambda, alpha) = t.hypers(theta);
                let p = t.param_count();
                let selfs: Vec<(f64, Vec<f64>)> = items
                    .par_iter()
                    .map(|&it| self.with_plan(t, it, it, |pl| t.eval_plan(pl, &lambda, &alpha, grads)))
                    .collect::<Result<_, _>>()?;
                let out: Vec<(f64, Vec<f64>)> = cells
                    .par_iter()
                    .map(|&(i, j)| {
                        if i == j {
                            return t.finish_diag(&selfs[i]);
                        }
                        let raw = self.with_plan(t, items[i], items[j], |pl| t.eval_plan(pl, &lambda, &alpha, grads))?;
                        t.finish(raw, &selfs[i], &selfs[j])
                    })
                    .collect::<Result<_, _>>()?;
                let (v, g): (Vec<f64>, Vec<Vec<f64>>) = out.into_iter().unzip();
                (v, g, p)
            }
            Leaf::Rbf { offset, .. } => {
                let h = RbfHypers { variance: theta[*offset], lengthscale: theta[offset + 1] };
                let out: Vec<(f64, Vec<f64>)> = cells
                    .par_iter()
                    .map(|&(i, j)| {
                        let (v, dv, dl) = rbf_with_grads(self.features_of(items[i]), self.features_of(items[j]), h)?;
                        Ok((v, if grads { vec![dv, dl] } else { Vec::new() }))
                    })
                    .collect::<Result<_, KernelError>>()?;
                let (v, g): (Vec<f64>, Vec<Vec<f64>>) = out.into_iter().unzip();
                (v, g, 2)
            }
        };
        let mut k = DMatrix::zeros(n, n);
        let mut dk = if grads { vec![DMatrix::zeros(n, n); p] } else { Vec::new() };
        for (c, &(i, j)) in cells.iter().enumerate() {
            k[(i, j)] = values[c];
            k[(j, i)] = values[c];
            if grads {
                for (m, g) in dk.iter_mut().zip(&grad_rows[c]) {
                    m[(i, j)] = *g;
                    m[(j, i)] = *g;
                }
            }
        }
        Ok(Block { k, dk })
    }

    fn leaf_cross(
        &self,
        leaf: &Leaf,
        theta: &[f64],
        rows: &[Item],
        cols: &[Item],
    ) -> Result<(DMatrix<f64>, DMatrix<f64>), KernelError> {
        let (m, n) = (rows.len(), cols.len());
        let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        match leaf {
            Leaf::Tree(t) => {
                let (lambda, alpha) = t.hypers(theta);
                let row_self: Vec<f64> = rows
                    .par_iter()
                    .map(|&it| self.self_plan_value(t, it, &lambda, &alpha))
                    .collect::<Result<_, _>>()?;
                let col_self: Vec<f64> = if t.normalized {
                    cols.par_iter().map(|&it| self.self_plan_value(t, it, &lambda, &alpha)).collect::<Result<_, _>>()?
                } else {
                    Vec::new()
                };
                let values: Vec<f64> = cells
                    .par_iter()
                    .map(|&(i, j)| {
                        let raw = self.with_plan(t, rows[i], cols[j], |pl| pl.value(&lambda, &alpha))?;
                        if t.normalized {
                            let (v, _) = normalize_with_grads(raw, row_self[i], col_self[j], &[], &[], &[])?;
                            Ok(v)
                        } else {
                            Ok(raw)
                        }
                    })
                    .collect::<Result<_, KernelError>>()?;
                let k = DMatrix::from_fn(m, n, |i, j| values[i * n + j]);
                let diag = if t.normalized {
                    for &s in &row_self {
                        if !(s > 0.0) {
                            return Err(KernelError::DegenerateSelfKernel { k11: s, k22: s });
                        }
                    }
                    DMatrix::from_element(m, 1, 1.0)
                } else {
                    DMatrix::from_column_slice(m, 1, &row_self)
                };
                Ok((k, diag))
            }
            Leaf::Rbf { offset, .. } => {
                let h = RbfHypers { variance: theta[*offset], lengthscale: theta[offset + 1] };
                let values: Vec<f64> = cells
                    .par_iter()
                    .map(|&(i, j)| Ok(rbf_with_grads(self.features_of(rows[i]), self.features_of(cols[j]), h)?.0))
                    .collect::<Result<_, KernelError>>()?;
                let k = DMatrix::from_fn(m, n, |i, j| values[i * n + j]);
                Ok((k, DMatrix::from_element(m, 1, h.variance)))
            }
        }
    }
}

impl TreeLeaf {
    fn param_count(&self) -> usize {
        let k = self.groups.group_count();
        if self.alpha_free {
            2 * k
        } else {
            k
        }
    }

    fn hypers(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let k = self.groups.group_count();
        let lambda = theta[self.offset..self.offset + k].to_vec();
        let alpha = if self.alpha_free { theta[self.offset + k..self.offset + 2 * k].to_vec() } else { vec![1.0; k] };
        (lambda, alpha)
    }

    /// Raw kernel value with the leaf's gradient vector (λ then free α).
    fn eval_plan(&self, plan: &PairPlan, lambda: &[f64], alpha: &[f64], grads: bool) -> (f64, Vec<f64>) {
        if !grads {
            return (plan.value(lambda, alpha), Vec::new());
        }
        let e = plan.eval(lambda, alpha);
        let mut g = e.d_lambda;
        if self.alpha_free {
            g.extend(e.d_alpha);
        }
        (e.value, g)
    }

    fn finish(&self, raw: (f64, Vec<f64>), a: &(f64, Vec<f64>), b: &(f64, Vec<f64>)) -> Result<(f64, Vec<f64>), KernelError> {
        if !self.normalized {
            return Ok(raw);
        }
        normalize_with_grads(raw.0, a.0, b.0, &raw.1, &a.1, &b.1)
    }

    fn finish_diag(&self, s: &(f64, Vec<f64>)) -> Result<(f64, Vec<f64>), KernelError> {
        if !self.normalized {
            return Ok(s.clone());
        }
        if !(s.0 > 0.0) {
            return Err(KernelError::DegenerateSelfKernel { k11: s.0, k22: s.0 });
        }
        Ok((1.0, vec![0.0; s.1.len()]))
    }
}

fn check_tree_input(input: &Input, slot: usize, groups: &GroupMap) -> Result<(), KernelError> {
    let tree = input.trees.get(slot).ok_or(KernelError::MissingSlot(format!("tree slot {slot}")))?;
    if tree.table_id() != groups.table_id() {
        return Err(KernelError::Tree(TreeError::MismatchedSymbolTables));
    }
    for node in tree.nodes() {
        groups.group_of(node.symbol)?;
    }
    Ok(())
}

fn check_dense_input(input: &Input, dim: usize) -> Result<(), KernelError> {
    let f = input.features.as_ref().ok_or(KernelError::MissingSlot("dense features".into()))?;
    if f.len() != dim {
        return Err(KernelError::DimensionMismatch { expected: dim, got: f.len() });
    }
    Ok(())
}

/// Combines leaf blocks along the kernel tree: sums add and concatenate
/// gradients, products multiply and apply the product rule.
fn compose(spec: &KernelSpec, leaves: &mut impl Iterator<Item = Block>) -> Block {
    match spec {
        KernelSpec::Tree { .. } | KernelSpec::Rbf { .. } => leaves.next().expect("one block per leaf"),
        KernelSpec::Sum { children } => {
            let parts: Vec<Block> = children.iter().map(|c| compose(c, leaves)).collect();
            let mut k = parts[0].k.clone();
            for p in &parts[1..] {
                k += &p.k;
            }
            let dk = parts.into_iter().flat_map(|p| p.dk).collect();
            Block { k, dk }
        }
        KernelSpec::Product { children } => {
            let parts: Vec<Block> = children.iter().map(|c| compose(c, leaves)).collect();
            let mut k = parts[0].k.clone();
            for p in &parts[1..] {
                k.component_mul_assign(&p.k);
            }
            let mut dk = Vec::new();
            for (c, part) in parts.iter().enumerate() {
                if part.dk.is_empty() {
                    continue;
                }
                let mut others = DMatrix::from_element(k.nrows(), k.ncols(), 1.0);
                for (d, q) in parts.iter().enumerate() {
                    if d != c {
                        others.component_mul_assign(&q.k);
                    }
                }
                dk.extend(part.dk.iter().map(|g| g.component_mul(&others)));
            }
            Block { k, dk }
        }
    }
}

/// Gram matrix and gradients over `inputs` in one call.
pub fn gram_with_grads(
    inputs: &[Input],
    spec: &KernelSpec,
    theta: &[f64],
    table: &SymbolTable,
) -> Result<GramResult, KernelError> {
    GramEngine::uncached(spec, inputs.to_vec(), table)?.gram_with_grads(theta)
}
