//! Bracketed constituency trees, interned for kernel dynamic programming.
//!
//! Trees are parsed once against a shared [`SymbolTable`] and are read-only
//! afterwards. Two trees can only be compared when they were parsed into the
//! same table.

mod io;
mod parse;
mod symbols;
mod tree;

pub use io::{parse_tree_lines, read_tree_file};
pub use parse::parse_bracketed;
pub use symbols::{
    DisplayProduction, Production, ProductionChild, ProductionId, SymbolId, SymbolTable, WordId,
};
pub use tree::{matching_node_pairs, DisplayTree, Node, ParsedTree};

pub(crate) use tree::for_each_matching_pair;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unbalanced brackets at byte {position}")]
    UnbalancedBrackets { position: usize },
    #[error("empty tree")]
    EmptyTree,
    #[error("node without label at byte {position}")]
    NodeWithoutLabel { position: usize },
    #[error("node without children at byte {position}")]
    EmptyNode { position: usize },
    #[error("expected '(' at byte {position}")]
    ExpectedOpenBracket { position: usize },
    #[error("trailing content after tree at byte {position}")]
    TrailingContent { position: usize },
    #[error("trees belong to different symbol tables")]
    MismatchedSymbolTables,
    #[error("line {line}: {source}")]
    Line { line: usize, source: Box<TreeError> },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl TreeError {
    pub fn code(&self) -> &'static str {
        match self {
            TreeError::UnbalancedBrackets { .. } => "unbalanced-brackets",
            TreeError::EmptyTree => "empty-tree",
            TreeError::NodeWithoutLabel { .. } => "node-without-label",
            TreeError::EmptyNode { .. } => "empty-node",
            TreeError::ExpectedOpenBracket { .. } => "expected-open-bracket",
            TreeError::TrailingContent { .. } => "trailing-content",
            TreeError::MismatchedSymbolTables => "mismatched-symbol-tables",
            TreeError::Line { source, .. } => source.code(),
            TreeError::Io { .. } => "io",
        }
    }
}
