use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

static NEXT_TABLE_ID: AtomicU64 = AtomicU64::new(1);

/// Interned non-terminal symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

/// Interned terminal token. Terminals are never symbols; they only take part
/// in production identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordId(pub u32);

/// Interned grammar production.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductionId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductionChild {
    Symbol(SymbolId),
    Word(WordId),
}

/// A grammar production `head -> children`. A preterminal production has a
/// single terminal child.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Production {
    pub head: SymbolId,
    pub children: Vec<ProductionChild>,
}

impl Production {
    pub fn is_preterminal(&self) -> bool {
        matches!(self.children.as_slice(), [ProductionChild::Word(_)])
    }
}

/// Bijective text <-> id interning for non-terminals, terminals and
/// productions. Ids are contiguous from 0 in order of first appearance.
#[derive(Debug)]
pub struct SymbolTable {
    id: u64,
    symbols: Vec<String>,
    symbol_ids: HashMap<String, SymbolId>,
    words: Vec<String>,
    word_ids: HashMap<String, WordId>,
    productions: Vec<Production>,
    production_ids: HashMap<Production, ProductionId>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self::new()
    }
}

impl SymbolTable {
    pub fn new() -> Self {
        SymbolTable {
            id: NEXT_TABLE_ID.fetch_add(1, Ordering::Relaxed),
            symbols: Vec::new(),
            symbol_ids: HashMap::new(),
            words: Vec::new(),
            word_ids: HashMap::new(),
            productions: Vec::new(),
            production_ids: HashMap::new(),
        }
    }

    /// Process-unique identity used to reject trees from different tables.
    pub fn table_id(&self) -> u64 {
        self.id
    }

    pub fn intern_symbol(&mut self, text: &str) -> SymbolId {
        if let Some(&id) = self.symbol_ids.get(text) {
            return id;
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(text.to_owned());
        self.symbol_ids.insert(text.to_owned(), id);
        id
    }

    pub fn intern_word(&mut self, text: &str) -> WordId {
        if let Some(&id) = self.word_ids.get(text) {
            return id;
        }
        let id = WordId(self.words.len() as u32);
        self.words.push(text.to_owned());
        self.word_ids.insert(text.to_owned(), id);
        id
    }

    pub fn intern_production(&mut self, production: Production) -> ProductionId {
        if let Some(&id) = self.production_ids.get(&production) {
            return id;
        }
        let id = ProductionId(self.productions.len() as u32);
        self.productions.push(production.clone());
        self.production_ids.insert(production, id);
        id
    }

    pub fn symbol(&self, text: &str) -> Option<SymbolId> {
        self.symbol_ids.get(text).copied()
    }

    pub fn symbol_text(&self, id: SymbolId) -> &str {
        &self.symbols[id.0 as usize]
    }

    pub fn word_text(&self, id: WordId) -> &str {
        &self.words[id.0 as usize]
    }

    pub fn production(&self, id: ProductionId) -> &Production {
        &self.productions[id.0 as usize]
    }

    /// All non-terminal symbols in interning order.
    pub fn symbols(&self) -> impl ExactSizeIterator<Item = (SymbolId, &str)> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (SymbolId(i as u32), s.as_str()))
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn production_count(&self) -> usize {
        self.productions.len()
    }

    pub fn display_production(&self, id: ProductionId) -> DisplayProduction<'_> {
        DisplayProduction { table: self, id }
    }
}

pub struct DisplayProduction<'a> {
    table: &'a SymbolTable,
    id: ProductionId,
}

impl fmt::Display for DisplayProduction<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.table.production(self.id);
        write!(f, "{} ->", self.table.symbol_text(p.head))?;
        for c in &p.children {
            match *c {
                ProductionChild::Symbol(s) => write!(f, " {}", self.table.symbol_text(s))?,
                ProductionChild::Word(w) => write!(f, " '{}'", self.table.word_text(w))?,
            }
        }
        Ok(())
    }
}
