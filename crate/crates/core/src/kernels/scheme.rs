use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::KernelError;
use crate::trees::{SymbolId, SymbolTable};

pub const CATCH_ALL: &str = "other";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// One λ and one α shared by every symbol (plain SSTK).
    Tied,
    /// One group per training symbol plus a catch-all.
    Full,
    /// Explicit groups of symbols plus a catch-all.
    Subset,
}

/// Assignment of non-terminal symbols to hyperparameter groups. Groups are
/// defined by symbol text so a scheme can be serialized and re-resolved
/// against a fresh [`SymbolTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TyingScheme {
    kind: SchemeKind,
    groups: Vec<String>,
    members: Vec<(String, usize)>,
    catch_all: Option<usize>,
}

impl TyingScheme {
    pub fn tied() -> Self {
        TyingScheme { kind: SchemeKind::Tied, groups: vec!["all".into()], members: Vec::new(), catch_all: Some(0) }
    }

    /// One group per symbol currently in `table`, in interning order, plus a
    /// catch-all for symbols first seen at prediction time.
    pub fn full(table: &SymbolTable) -> Self {
        let mut groups: Vec<String> = table.symbols().map(|(_, s)| s.to_owned()).collect();
        let members = groups.iter().enumerate().map(|(g, s)| (s.clone(), g)).collect();
        let catch = unique_catch_all(&groups);
        groups.push(catch);
        TyingScheme { kind: SchemeKind::Full, catch_all: Some(groups.len() - 1), groups, members }
    }

    /// Each inner list becomes one group named by its members joined with
    /// `+`; every other symbol falls into the catch-all group.
    pub fn subset<S: AsRef<str>>(groups: &[Vec<S>]) -> Self {
        let named = groups
            .iter()
            .map(|g| {
                let syms: Vec<String> = g.iter().map(|s| s.as_ref().to_owned()).collect();
                (syms.join("+"), syms)
            })
            .collect();
        let mut scheme = Self::explicit(named, Some(CATCH_ALL.to_owned()));
        scheme.kind = SchemeKind::Subset;
        scheme
    }

    /// Fully explicit grouping. Without a catch-all, symbols outside every
    /// group are rejected with [`KernelError::UnknownSymbol`].
    pub fn explicit(groups: Vec<(String, Vec<String>)>, catch_all: Option<String>) -> Self {
        let mut names = Vec::with_capacity(groups.len() + 1);
        let mut members = Vec::new();
        for (g, (name, syms)) in groups.into_iter().enumerate() {
            names.push(name);
            members.extend(syms.into_iter().map(|s| (s, g)));
        }
        let catch_all = catch_all.map(|c| {
            let c = if names.contains(&c) { unique_catch_all(&names) } else { c };
            names.push(c);
            names.len() - 1
        });
        TyingScheme { kind: SchemeKind::Subset, groups: names, members, catch_all }
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn group_names(&self) -> &[String] {
        &self.groups
    }

    pub fn has_catch_all(&self) -> bool {
        self.catch_all.is_some()
    }

    pub fn resolve(&self, table: &SymbolTable) -> GroupMap {
        let by_text: HashMap<&str, usize> = self.members.iter().map(|(s, g)| (s.as_str(), *g)).collect();
        let mut map = Vec::with_capacity(table.symbol_count());
        let mut names = Vec::with_capacity(table.symbol_count());
        for (_, text) in table.symbols() {
            let g = by_text.get(text).copied().or(self.catch_all);
            map.push(g.map_or(GroupMap::NONE, |g| g as u32));
            names.push(text.to_owned());
        }
        GroupMap {
            table_id: table.table_id(),
            groups: self.groups.len(),
            map,
            names,
            catch_all: self.catch_all.map(|g| g as u32),
        }
    }
}

fn unique_catch_all(existing: &[String]) -> String {
    let mut name = CATCH_ALL.to_owned();
    while existing.contains(&name) {
        name.push('_');
    }
    name
}

/// A [`TyingScheme`] resolved against one symbol table. Symbols interned
/// after resolution map to the catch-all group.
#[derive(Debug, Clone)]
pub struct GroupMap {
    table_id: u64,
    groups: usize,
    map: Vec<u32>,
    names: Vec<String>,
    catch_all: Option<u32>,
}

impl GroupMap {
    const NONE: u32 = u32::MAX;

    pub fn table_id(&self) -> u64 {
        self.table_id
    }

    pub fn group_count(&self) -> usize {
        self.groups
    }

    pub fn group_of(&self, symbol: SymbolId) -> Result<u32, KernelError> {
        let g = self.map.get(symbol.0 as usize).copied().unwrap_or(GroupMap::NONE);
        if g != GroupMap::NONE {
            return Ok(g);
        }
        if (symbol.0 as usize) >= self.map.len() {
            if let Some(c) = self.catch_all {
                return Ok(c);
            }
        }
        let name = self.names.get(symbol.0 as usize).cloned().unwrap_or_else(|| format!("#{}", symbol.0));
        Err(KernelError::UnknownSymbol(name))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaMode {
    #[default]
    Free,
    /// α is pinned to 1 and is not a hyperparameter.
    FixedAtOne,
}

/// Per-group decay (λ) and selector (α) values.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeKernelHypers {
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl TreeKernelHypers {
    pub fn new(lambda: Vec<f64>, alpha: Vec<f64>) -> Self {
        TreeKernelHypers { lambda, alpha }
    }

    pub fn uniform(groups: usize, lambda: f64, alpha: f64) -> Self {
        TreeKernelHypers { lambda: vec![lambda; groups], alpha: vec![alpha; groups] }
    }

    pub fn validate(&self, groups: usize) -> Result<(), KernelError> {
        if self.lambda.len() != groups || self.alpha.len() != groups {
            return Err(KernelError::HyperCount { expected: groups, got: self.lambda.len().min(self.alpha.len()) });
        }
        if let Some(&l) = self.lambda.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(KernelError::InvalidHyper(format!("lambda must be positive, got {l}")));
        }
        if let Some(&a) = self.alpha.iter().find(|&&a| !(a >= 0.0 && a.is_finite())) {
            return Err(KernelError::InvalidHyper(format!("alpha must be non-negative, got {a}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::parse_bracketed;

    #[test]
    fn tied_scheme_has_one_group() {
        let mut t = SymbolTable::new();
        parse_bracketed("(S (A a) (B b))", &mut t).unwrap();
        let g = TyingScheme::tied().resolve(&t);
        assert_eq!(g.group_count(), 1);
        for (id, _) in t.symbols() {
            assert_eq!(g.group_of(id).unwrap(), 0);
        }
    }

    #[test]
    fn full_scheme_gives_each_symbol_a_group_and_catches_new_ones() {
        let mut t = SymbolTable::new();
        parse_bracketed("(S (A a) (B b))", &mut t).unwrap();
        let scheme = TyingScheme::full(&t);
        assert_eq!(scheme.group_names(), &["A", "B", "S", "other"]);
        let g = scheme.resolve(&t);
        let s = t.symbol("S").unwrap();
        assert_eq!(g.group_of(s).unwrap(), 2);
        let new = t.intern_symbol("NEW");
        assert_eq!(g.group_of(new).unwrap(), 3);
    }

    #[test]
    fn subset_scheme_routes_listed_symbols() {
        let mut t = SymbolTable::new();
        parse_bracketed("(S (SQ (A a)) (B b))", &mut t).unwrap();
        let scheme = TyingScheme::subset(&[vec!["S", "SQ"]]);
        assert_eq!(scheme.group_names(), &["S+SQ", "other"]);
        let g = scheme.resolve(&t);
        assert_eq!(g.group_of(t.symbol("SQ").unwrap()).unwrap(), 0);
        assert_eq!(g.group_of(t.symbol("A").unwrap()).unwrap(), 1);
    }

    #[test]
    fn explicit_scheme_without_catch_all_rejects_unknown() {
        let mut t = SymbolTable::new();
        parse_bracketed("(S (A a))", &mut t).unwrap();
        let scheme = TyingScheme::explicit(vec![("S".into(), vec!["S".into()])], None);
        let g = scheme.resolve(&t);
        assert!(matches!(g.group_of(t.symbol("A").unwrap()), Err(KernelError::UnknownSymbol(s)) if s == "A"));
    }

    #[test]
    fn catch_all_name_avoids_collisions() {
        let mut t = SymbolTable::new();
        parse_bracketed("(other (A a))", &mut t).unwrap();
        let scheme = TyingScheme::full(&t);
        assert_eq!(scheme.group_names().last().unwrap(), "other_");
    }

    #[test]
    fn hyper_validation() {
        assert!(TreeKernelHypers::uniform(2, 0.5, 0.0).validate(2).is_ok());
        assert!(TreeKernelHypers::uniform(2, 0.0, 1.0).validate(2).is_err());
        assert!(TreeKernelHypers::uniform(2, 0.5, -1.0).validate(2).is_err());
        assert!(TreeKernelHypers::uniform(1, 0.5, 1.0).validate(2).is_err());
    }
}
