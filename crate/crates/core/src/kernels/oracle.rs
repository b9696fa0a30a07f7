//! Exhaustive fragment-enumeration reference for the subset tree kernel.
//!
//! Every fragment rooted at a node contains that node's full production; each
//! non-terminal child is either cut (left as a bare label) or expanded into a
//! fragment of its own. A fragment's weight is the product of `λ` over its
//! internal nodes times `α` of the parent for every cut child. The kernel is
//! `Σ_f w(f) c1(f) c2(f)`. Exponential in tree size; use only on small trees.

use std::collections::HashMap;
use std::fmt::Write;

use super::scheme::{GroupMap, TreeKernelHypers};
use super::KernelError;
use crate::trees::{ParsedTree, TreeError};

pub fn brute_force_kernel(
    t1: &ParsedTree,
    t2: &ParsedTree,
    hypers: &TreeKernelHypers,
    groups: &GroupMap,
    max_nodes: usize,
) -> Result<f64, KernelError> {
    if t1.table_id() != t2.table_id() {
        return Err(KernelError::Tree(TreeError::MismatchedSymbolTables));
    }
    for t in [t1, t2] {
        if t.len() > max_nodes {
            return Err(KernelError::TooLarge { nodes: t.len(), max: max_nodes });
        }
    }
    hypers.validate(groups.group_count())?;
    let c1 = fragment_counts(t1, hypers, groups)?;
    let c2 = fragment_counts(t2, hypers, groups)?;
    Ok(c1
        .iter()
        .filter_map(|(f, &(n1, w))| c2.get(f).map(|&(n2, _)| w * n1 as f64 * n2 as f64))
        .sum())
}

fn fragment_counts(
    tree: &ParsedTree,
    hypers: &TreeKernelHypers,
    groups: &GroupMap,
) -> Result<HashMap<String, (usize, f64)>, KernelError> {
    let mut memo: Vec<Vec<(String, f64)>> = Vec::with_capacity(tree.len());
    // Post-order storage means children are enumerated before parents.
    for n in 0..tree.len() {
        let frags = fragments_at(tree, n, &memo, hypers, groups)?;
        memo.push(frags);
    }
    let mut counts: HashMap<String, (usize, f64)> = HashMap::new();
    for frags in memo {
        for (f, w) in frags {
            counts.entry(f).or_insert((0, w)).0 += 1;
        }
    }
    Ok(counts)
}

fn fragments_at(
    tree: &ParsedTree,
    n: usize,
    memo: &[Vec<(String, f64)>],
    hypers: &TreeKernelHypers,
    groups: &GroupMap,
) -> Result<Vec<(String, f64)>, KernelError> {
    let node = tree.node(n);
    let g = groups.group_of(node.symbol)? as usize;
    let (lambda, alpha) = (hypers.lambda[g], hypers.alpha[g]);
    let kids = tree.children(n);
    let words = tree.terminals(n);
    let arity = kids.len() + words.len();

    let mut partial: Vec<(String, f64)> = vec![(format!("(s{}", node.symbol.0), lambda)];
    let (mut next_kid, mut next_word) = (0, 0);
    for pos in 0..arity {
        if next_word < words.len() && words[next_word].0 == pos {
            let w = words[next_word].1;
            for (s, _) in partial.iter_mut() {
                write!(s, " w{}", w.0).unwrap();
            }
            next_word += 1;
            continue;
        }
        let kid = kids[next_kid] as usize;
        next_kid += 1;
        let label = tree.node(kid).symbol.0;
        let mut extended = Vec::with_capacity(partial.len() * (memo[kid].len() + 1));
        for (s, w) in &partial {
            extended.push((format!("{s} s{label}"), w * alpha));
            for (f, fw) in &memo[kid] {
                extended.push((format!("{s} {f}"), w * fw));
            }
        }
        partial = extended;
    }
    for (s, _) in partial.iter_mut() {
        s.push(')');
    }
    Ok(partial)
}
