mod common;

use common::*;
use proptest::prelude::*;
use treegp::trees::{matching_node_pairs, parse_bracketed, parse_tree_lines, read_tree_file, SymbolTable};

#[test]
fn three_node_tree_structure() {
    let mut t = SymbolTable::new();
    let tree = parse_bracketed("(S (A a) (B b))", &mut t).unwrap();
    assert_eq!(tree.len(), 3);
    assert_eq!(tree.token_count(), 2);
    let mut pairs = matching_node_pairs(&tree, &tree).unwrap();
    pairs.sort();
    assert_eq!(pairs.len(), 3);
    assert!(pairs.iter().all(|(a, b)| a == b));
}

#[test]
fn malformed_input_gets_a_specific_code() {
    let cases = [
        ("(S (A a)", "unbalanced-brackets"),
        ("", "empty-tree"),
        ("( (A a))", "node-without-label"),
        ("(S)", "empty-node"),
        ("S (A a)", "expected-open-bracket"),
        ("(S (A a)) (B b)", "trailing-content"),
    ];
    for (text, code) in cases {
        let mut t = SymbolTable::new();
        assert_eq!(parse_bracketed(text, &mut t).unwrap_err().code(), code, "{text:?}");
    }
}

#[test]
fn file_errors_carry_line_numbers() {
    let mut t = SymbolTable::new();
    let err = parse_tree_lines("(S (A a))\n(S (B b)\n", &mut t).unwrap_err();
    assert!(err.to_string().starts_with("line 2"), "{err}");
    assert_eq!(err.code(), "unbalanced-brackets");
    assert_eq!(read_tree_file("/nonexistent/trees.txt", &mut t).unwrap_err().code(), "io");
}

#[test]
fn trees_from_different_tables_do_not_mix() {
    let (mut t1, mut t2) = (SymbolTable::new(), SymbolTable::new());
    let a = parse_bracketed("(A a)", &mut t1).unwrap();
    let b = parse_bracketed("(A a)", &mut t2).unwrap();
    assert_eq!(matching_node_pairs(&a, &b).unwrap_err().code(), "mismatched-symbol-tables");
}

#[test]
fn preterminal_productions_include_the_word() {
    let mut t = SymbolTable::new();
    let a = parse_bracketed("(A a)", &mut t).unwrap();
    let b = parse_bracketed("(A b)", &mut t).unwrap();
    assert!(matching_node_pairs(&a, &b).unwrap().is_empty());
}

proptest! {
    #[test]
    fn bracketed_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let text = random_tree_text(&mut r, 12);
        let mut t = SymbolTable::new();
        let tree = parse_bracketed(&text, &mut t).unwrap();
        prop_assert_eq!(tree.to_bracketed(&t).unwrap(), text.clone());
        let spaced = text.replace(' ', "  \t").replace(')', " ) ");
        let again = parse_bracketed(&spaced, &mut t).unwrap();
        prop_assert_eq!(again.to_bracketed(&t).unwrap(), text);
    }

    #[test]
    fn matching_pairs_share_productions(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut t = full_table();
        let a = random_tree(&mut r, &mut t, 8);
        let b = random_tree(&mut r, &mut t, 8);
        for (i, j) in matching_node_pairs(&a, &b).unwrap() {
            prop_assert_eq!(a.node(i).production, b.node(j).production);
        }
    }
}
