use super::symbols::{Production, ProductionChild, SymbolTable, WordId};
use super::tree::ParsedTree;
use super::TreeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(text: &str) -> Vec<(usize, Token<'_>)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (pos, ch) in text.char_indices() {
        let delimiter = ch == '(' || ch == ')' || ch.is_whitespace();
        if delimiter {
            if let Some(s) = start.take() {
                out.push((s, Token::Atom(&text[s..pos])));
            }
            match ch {
                '(' => out.push((pos, Token::Open)),
                ')' => out.push((pos, Token::Close)),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(pos);
        }
    }
    if let Some(s) = start {
        out.push((s, Token::Atom(&text[s..])));
    }
    out
}

enum Child {
    Node(u32),
    Word(WordId),
}

struct Frame {
    open_pos: usize,
    label: String,
    children: Vec<Child>,
}

type RawNode = (
    super::symbols::SymbolId,
    super::symbols::ProductionId,
    bool,
    Vec<u32>,
    Vec<(usize, WordId)>,
);

/// Parses one bracketed tree such as `(S (A a) (B b))`, registering its
/// labels, terminals and productions in `table`.
pub fn parse_bracketed(text: &str, table: &mut SymbolTable) -> Result<ParsedTree, TreeError> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(TreeError::EmptyTree);
    }
    if let [(_, Token::Open), (_, Token::Close)] = tokens.as_slice() {
        return Err(TreeError::EmptyTree);
    }

    let mut stack: Vec<Frame> = Vec::new();
    let mut nodes: Vec<RawNode> = Vec::new();
    let mut finished = false;
    let mut i = 0;
    while i < tokens.len() {
        let (pos, tok) = tokens[i];
        if finished {
            return Err(match tok {
                Token::Close => TreeError::UnbalancedBrackets { position: pos },
                _ => TreeError::TrailingContent { position: pos },
            });
        }
        match tok {
            Token::Open => {
                let label = match tokens.get(i + 1) {
                    Some((_, Token::Atom(l))) => l,
                    _ => return Err(TreeError::NodeWithoutLabel { position: pos }),
                };
                stack.push(Frame { open_pos: pos, label: (*label).to_owned(), children: Vec::new() });
                i += 2;
                continue;
            }
            Token::Atom(word) => match stack.last_mut() {
                Some(frame) => frame.children.push(Child::Word(table.intern_word(word))),
                None => return Err(TreeError::ExpectedOpenBracket { position: pos }),
            },
            Token::Close => {
                let frame = stack.pop().ok_or(TreeError::UnbalancedBrackets { position: pos })?;
                if frame.children.is_empty() {
                    return Err(TreeError::EmptyNode { position: frame.open_pos });
                }
                let symbol = table.intern_symbol(&frame.label);
                let mut prod_children = Vec::with_capacity(frame.children.len());
                let mut kids = Vec::new();
                let mut words = Vec::new();
                for (k, c) in frame.children.iter().enumerate() {
                    match *c {
                        Child::Node(idx) => {
                            prod_children.push(ProductionChild::Symbol(nodes[idx as usize].0));
                            kids.push(idx);
                        }
                        Child::Word(w) => {
                            prod_children.push(ProductionChild::Word(w));
                            words.push((k, w));
                        }
                    }
                }
                let production = Production { head: symbol, children: prod_children };
                let preterminal = production.is_preterminal();
                let pid = table.intern_production(production);
                let index = nodes.len() as u32;
                nodes.push((symbol, pid, preterminal, kids, words));
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Child::Node(index)),
                    None => finished = true,
                }
            }
        }
        i += 1;
    }
    if let Some(frame) = stack.last() {
        return Err(TreeError::UnbalancedBrackets { position: frame.open_pos });
    }
    Ok(ParsedTree::from_parts(table.table_id(), nodes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_three_node_tree() {
        let mut t = SymbolTable::new();
        let tree = parse_bracketed("(S (A a) (B b))", &mut t).unwrap();
        assert_eq!(tree.len(), 3);
        assert_eq!(tree.nodes().iter().filter(|n| n.preterminal).count(), 2);
        let root = tree.node(tree.root());
        assert_eq!(t.symbol_text(root.symbol), "S");
        assert_eq!(t.display_production(root.production).to_string(), "S -> A B");
        assert_eq!(tree.children(tree.root()), &[0, 1]);
    }

    #[test]
    fn minimal_tree_is_single_preterminal() {
        let mut t = SymbolTable::new();
        let tree = parse_bracketed("(A a)", &mut t).unwrap();
        assert_eq!(tree.len(), 1);
        assert!(tree.node(0).preterminal);
    }

    #[test]
    fn canonicalizes_whitespace() {
        let mut t = SymbolTable::new();
        let tree = parse_bracketed("  (S\n\t(NP (DT the)(NN cat) )  (VP (VBD sat)))  ", &mut t).unwrap();
        assert_eq!(
            tree.to_bracketed(&t).unwrap(),
            "(S (NP (DT the) (NN cat)) (VP (VBD sat)))"
        );
    }

    #[test]
    fn mixed_terminal_children_are_kept_in_order() {
        let mut t = SymbolTable::new();
        let tree = parse_bracketed("(NP the (JJ big) cat)", &mut t).unwrap();
        assert_eq!(tree.to_bracketed(&t).unwrap(), "(NP the (JJ big) cat)");
        assert!(!tree.node(tree.root()).preterminal);
        assert_eq!(tree.token_count(), 3);
    }

    #[test]
    fn error_cases() {
        let mut t = SymbolTable::new();
        assert_eq!(
            parse_bracketed("(S (A a)", &mut t),
            Err(TreeError::UnbalancedBrackets { position: 0 })
        );
        assert_eq!(parse_bracketed("", &mut t), Err(TreeError::EmptyTree));
        assert_eq!(parse_bracketed("   ", &mut t), Err(TreeError::EmptyTree));
        assert_eq!(parse_bracketed("()", &mut t), Err(TreeError::EmptyTree));
        assert_eq!(
            parse_bracketed("( (S (A a)))", &mut t),
            Err(TreeError::NodeWithoutLabel { position: 0 })
        );
        assert_eq!(
            parse_bracketed("(A a) (B b)", &mut t),
            Err(TreeError::TrailingContent { position: 6 })
        );
        assert_eq!(
            parse_bracketed("(A a))", &mut t),
            Err(TreeError::UnbalancedBrackets { position: 5 })
        );
        assert_eq!(parse_bracketed("(A)", &mut t), Err(TreeError::EmptyNode { position: 0 }));
        assert_eq!(
            parse_bracketed("word", &mut t),
            Err(TreeError::ExpectedOpenBracket { position: 0 })
        );
    }
}
