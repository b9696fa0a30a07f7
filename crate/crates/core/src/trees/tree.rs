use std::fmt;

use super::symbols::{Production, ProductionChild, ProductionId, SymbolId, SymbolTable, WordId};
use super::TreeError;

/// One non-terminal node. Terminals are not nodes; they live inside the
/// node's production.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Node {
    pub symbol: SymbolId,
    pub production: ProductionId,
    pub preterminal: bool,
    kid_start: u32,
    kid_len: u32,
}

/// Immutable constituency tree. Nodes are stored in post-order, so every
/// child index is smaller than its parent's and the root is the last node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedTree {
    table_id: u64,
    nodes: Vec<Node>,
    kids: Vec<u32>,
    /// Terminal tokens per node in production order (empty for nodes without
    /// terminal children); kept so the tree can be printed without the table.
    words: Vec<Vec<(usize, WordId)>>,
    by_production: Vec<(ProductionId, u32)>,
}

impl ParsedTree {
    pub(crate) fn from_parts(
        table_id: u64,
        nodes: Vec<(SymbolId, ProductionId, bool, Vec<u32>, Vec<(usize, WordId)>)>,
    ) -> Self {
        let mut out_nodes = Vec::with_capacity(nodes.len());
        let mut kids = Vec::new();
        let mut words = Vec::with_capacity(nodes.len());
        for (symbol, production, preterminal, children, ws) in nodes {
            out_nodes.push(Node {
                symbol,
                production,
                preterminal,
                kid_start: kids.len() as u32,
                kid_len: children.len() as u32,
            });
            kids.extend(children);
            words.push(ws);
        }
        let mut by_production: Vec<(ProductionId, u32)> = out_nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.production, i as u32))
            .collect();
        by_production.sort_unstable();
        ParsedTree { table_id, nodes: out_nodes, kids, words, by_production }
    }

    pub fn table_id(&self) -> u64 {
        self.table_id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Non-terminal children of `index`, left to right.
    pub fn children(&self, index: usize) -> &[u32] {
        let n = &self.nodes[index];
        &self.kids[n.kid_start as usize..(n.kid_start + n.kid_len) as usize]
    }

    /// Terminal token positions within the node's production.
    pub fn terminals(&self, index: usize) -> &[(usize, WordId)] {
        &self.words[index]
    }

    pub(crate) fn sorted_productions(&self) -> &[(ProductionId, u32)] {
        &self.by_production
    }

    /// Number of terminal tokens (the sentence length).
    pub fn token_count(&self) -> usize {
        self.words.iter().map(Vec::len).sum()
    }

    /// Canonical bracketed form: single spaces, no redundant whitespace.
    pub fn to_bracketed(&self, table: &SymbolTable) -> Result<String, TreeError> {
        if table.table_id() != self.table_id {
            return Err(TreeError::MismatchedSymbolTables);
        }
        let mut out = String::new();
        self.write_node(self.root(), table, &mut out);
        Ok(out)
    }

    fn write_node(&self, index: usize, table: &SymbolTable, out: &mut String) {
        let node = &self.nodes[index];
        let production: &Production = table.production(node.production);
        out.push('(');
        out.push_str(table.symbol_text(node.symbol));
        let mut kids = self.children(index).iter();
        for child in &production.children {
            out.push(' ');
            match *child {
                ProductionChild::Symbol(_) => {
                    let k = *kids.next().expect("production arity matches node");
                    self.write_node(k as usize, table, out);
                }
                ProductionChild::Word(w) => out.push_str(table.word_text(w)),
            }
        }
        out.push(')');
    }

    pub fn display<'a>(&'a self, table: &'a SymbolTable) -> DisplayTree<'a> {
        DisplayTree { tree: self, table }
    }
}

pub struct DisplayTree<'a> {
    tree: &'a ParsedTree,
    table: &'a SymbolTable,
}

impl fmt::Display for DisplayTree<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tree.to_bracketed(self.table) {
            Ok(s) => f.write_str(&s),
            Err(_) => f.write_str("<tree from another symbol table>"),
        }
    }
}

/// All node pairs with equal productions, ordered by (n1, n2). Because nodes
/// are in post-order this also lists child pairs before their parents.
pub fn matching_node_pairs(t1: &ParsedTree, t2: &ParsedTree) -> Result<Vec<(usize, usize)>, TreeError> {
    if t1.table_id != t2.table_id {
        return Err(TreeError::MismatchedSymbolTables);
    }
    let mut pairs = Vec::new();
    for_each_matching_pair(t1, t2, |a, b| pairs.push((a as usize, b as usize)));
    pairs.sort_unstable();
    Ok(pairs)
}

/// Merge-join over production-sorted node lists. Visits pairs in production
/// order; callers that need post-order must sort.
pub(crate) fn for_each_matching_pair(t1: &ParsedTree, t2: &ParsedTree, mut f: impl FnMut(u32, u32)) {
    let (a, b) = (t1.sorted_productions(), t2.sorted_productions());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let p = a[i].0;
                let i_end = i + a[i..].iter().take_while(|x| x.0 == p).count();
                let j_end = j + b[j..].iter().take_while(|x| x.0 == p).count();
                for x in &a[i..i_end] {
                    for y in &b[j..j_end] {
                        f(x.1, y.1);
                    }
                }
                i = i_end;
                j = j_end;
            }
        }
    }
}
