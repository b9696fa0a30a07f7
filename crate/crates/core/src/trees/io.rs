use std::fs;
use std::path::Path;

use super::{parse_bracketed, ParsedTree, SymbolTable, TreeError};

/// Parses a tree file body: one bracketed tree per non-empty line, `#` lines
/// are comments. Errors carry 1-based line numbers.
pub fn parse_tree_lines(text: &str, table: &mut SymbolTable) -> Result<Vec<ParsedTree>, TreeError> {
    let mut trees = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tree = parse_bracketed(trimmed, table)
            .map_err(|e| TreeError::Line { line: k + 1, source: Box::new(e) })?;
        trees.push(tree);
    }
    Ok(trees)
}

pub fn read_tree_file(path: impl AsRef<Path>, table: &mut SymbolTable) -> Result<Vec<ParsedTree>, TreeError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| TreeError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_tree_lines(&text, table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_comments_and_blank_lines() {
        let mut t = SymbolTable::new();
        let trees = parse_tree_lines("# header\n(A a)\n\n  (B b)\n", &mut t).unwrap();
        assert_eq!(trees.len(), 2);
    }

    #[test]
    fn reports_line_numbers() {
        let mut t = SymbolTable::new();
        let err = parse_tree_lines("(A a)\n# c\n(S (A a)\n", &mut t).unwrap_err();
        assert_eq!(
            err,
            TreeError::Line { line: 3, source: Box::new(TreeError::UnbalancedBrackets { position: 0 }) }
        );
        assert_eq!(err.code(), "unbalanced-brackets");
    }
}
