#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treegp::kernels::{Input, TreeKernelHypers};
use treegp::trees::{parse_bracketed, ParsedTree, SymbolTable};

pub const SYMBOLS: [&str; 5] = ["A", "B", "C", "D", "E"];
pub const WORDS: [&str; 5] = ["a", "b", "c", "d", "e"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn grow(rng: &mut impl Rng, budget: &mut usize, depth: usize, out: &mut String) {
    *budget -= 1;
    let sym = SYMBOLS[rng.gen_range(0..SYMBOLS.len())];
    if *budget == 0 || depth >= 3 || rng.gen_bool(0.4) {
        out.push_str(&format!("({sym} {})", WORDS[rng.gen_range(0..WORDS.len())]));
        return;
    }
    out.push('(');
    out.push_str(sym);
    let arity = rng.gen_range(1..=3);
    for _ in 0..arity {
        if *budget == 0 {
            break;
        }
        out.push(' ');
        grow(rng, budget, depth + 1, out);
    }
    out.push(')');
}

/// Bracketed tree with at most `max_nonterminals` non-terminal nodes drawn
/// from a five-symbol, five-word vocabulary.
pub fn random_tree_text(rng: &mut impl Rng, max_nonterminals: usize) -> String {
    let mut budget = rng.gen_range(1..=max_nonterminals);
    let mut out = String::new();
    grow(rng, &mut budget, 0, &mut out);
    out
}

/// A table with every test symbol interned, so full-scheme groups cover all.
pub fn full_table() -> SymbolTable {
    let mut t = SymbolTable::new();
    for s in SYMBOLS {
        t.intern_symbol(s);
    }
    t
}

pub fn random_tree(rng: &mut impl Rng, table: &mut SymbolTable, max_nonterminals: usize) -> ParsedTree {
    parse_bracketed(&random_tree_text(rng, max_nonterminals), table).expect("generated tree parses")
}

pub fn random_inputs(rng: &mut impl Rng, table: &mut SymbolTable, n: usize, max_nonterminals: usize) -> Vec<Input> {
    (0..n).map(|_| Input::tree(random_tree(rng, table, max_nonterminals))).collect()
}

pub fn random_hypers(rng: &mut impl Rng, groups: usize, alpha_low: f64) -> TreeKernelHypers {
    TreeKernelHypers::new(
        (0..groups).map(|_| rng.gen_range(0.05..=1.0)).collect(),
        (0..groups).map(|_| rng.gen_range(alpha_low..=1.5)).collect(),
    )
}

/// `|a - b| / max(|a|, |b|)`, zero when both are zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Largest componentwise difference relative to the largest magnitude.
pub fn vec_rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Central finite differences of `f` at `x` with steps relative to each
/// coordinate.
pub fn central_diff(x: &[f64], rel_step: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let h = rel_step * x[i].abs().max(1e-3);
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}
