//! Reads a bracketed tree file, prints symbol and production statistics and
//! shows how malformed lines are reported.
//!
//! `cargo run --example parse_trees -- [path]` (defaults to the bundled data).

use std::collections::BTreeMap;

use treegp::trees::{parse_tree_lines, read_tree_file, SymbolTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/synth200.trees").to_owned());
    let mut table = SymbolTable::new();
    let trees = read_tree_file(&path, &mut table)?;
    let nodes: usize = trees.iter().map(|t| t.len()).sum();
    let tokens: usize = trees.iter().map(|t| t.token_count()).sum();
    println!("{path}: {} trees, {nodes} non-terminal nodes, {tokens} tokens", trees.len());
    println!("{} symbols, {} productions", table.symbol_count(), table.production_count());

    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in &trees {
        for n in t.nodes().iter().filter(|n| !n.preterminal) {
            *counts.entry(table.display_production(n.production).to_string()).or_default() += 1;
        }
    }
    let mut top: Vec<_> = counts.into_iter().collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    for (p, c) in top.iter().take(8) {
        println!("    {c:>5}  {p}");
    }
    println!("first tree: {}", trees[0].display(&table));

    let bad = "(S (NP (DT a) (NN cat)) (VP (VBD sat)))\n(S (NP x) (VP\n";
    if let Err(e) = parse_tree_lines(bad, &mut table) {
        println!("malformed input -> {} ({})", e, e.code());
    }
    Ok(())
}
