//! Seeded random-PCFG treebank over a small English-like grammar.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreebankConfig {
    pub size: usize,
    pub seed: u64,
    /// Depth after which only non-recursive rules are chosen.
    pub max_depth: usize,
}

impl Default for TreebankConfig {
    fn default() -> Self {
        TreebankConfig { size: 1000, seed: 0, max_depth: 4 }
    }
}

struct Rule {
    rhs: &'static [&'static str],
    weight: f64,
    recursive: bool,
}

const fn r(rhs: &'static [&'static str], weight: f64, recursive: bool) -> Rule {
    Rule { rhs, weight, recursive }
}

fn rules(symbol: &str) -> &'static [Rule] {
    const S: &[Rule] = &[
        r(&["NP", "VP", "."], 6.0, false),
        r(&["NP", "VP"], 2.0, false),
        r(&["S", "CC", "S", "."], 1.0, true),
        r(&["SBAR", "NP", "VP", "."], 1.0, true),
        r(&["ADVP", "NP", "VP", "."], 1.0, false),
    ];
    const NP: &[Rule] = &[
        r(&["DT", "NN"], 5.0, false),
        r(&["DT", "JJ", "NN"], 2.0, false),
        r(&["NNP"], 2.0, false),
        r(&["PRP"], 3.0, false),
        r(&["NNS"], 2.0, false),
        r(&["DT", "ADJP", "NNS"], 1.0, false),
        r(&["NP", "PP"], 2.0, true),
        r(&["NP", "CC", "NP"], 1.0, true),
        r(&["NP", "SBAR"], 1.0, true),
    ];
    const VP: &[Rule] = &[
        r(&["VBD", "NP"], 4.0, false),
        r(&["VBZ", "NP"], 3.0, false),
        r(&["VBD"], 2.0, false),
        r(&["VBZ", "ADJP"], 2.0, false),
        r(&["MD", "VB", "NP"], 2.0, false),
        r(&["VBD", "NP", "PP"], 2.0, true),
        r(&["VBD", "SBAR"], 1.0, true),
        r(&["VP", "ADVP"], 1.0, true),
        r(&["VP", "CC", "VP"], 1.0, true),
    ];
    const PP: &[Rule] = &[r(&["IN", "NP"], 1.0, false)];
    const ADJP: &[Rule] = &[r(&["JJ"], 3.0, false), r(&["RB", "JJ"], 1.0, false)];
    const ADVP: &[Rule] = &[r(&["RB"], 1.0, false)];
    const SBAR: &[Rule] = &[r(&["IN", "S"], 2.0, false), r(&["WDT", "VP"], 1.0, false)];
    match symbol {
        "S" => S,
        "NP" => NP,
        "VP" => VP,
        "PP" => PP,
        "ADJP" => ADJP,
        "ADVP" => ADVP,
        "SBAR" => SBAR,
        _ => &[],
    }
}

fn words(tag: &str) -> &'static [&'static str] {
    match tag {
        "DT" => &["the", "a", "this", "every"],
        "NN" => &["dog", "house", "city", "story", "teacher", "river", "plan", "song"],
        "NNS" => &["dogs", "houses", "stories", "teachers", "ideas", "years"],
        "NNP" => &["Mary", "London", "John", "Paris"],
        "PRP" => &["he", "she", "it", "they"],
        "VBD" => &["saw", "liked", "found", "wrote", "left", "said"],
        "VBZ" => &["sees", "likes", "is", "finds", "seems"],
        "VB" => &["see", "like", "find", "write"],
        "MD" => &["will", "can", "might"],
        "JJ" => &["big", "old", "happy", "green", "strange"],
        "RB" => &["very", "quickly", "often", "never"],
        "IN" => &["in", "on", "with", "because", "near"],
        "CC" => &["and", "but", "or"],
        "WDT" => &["that", "which"],
        "." => &["."],
        _ => &[],
    }
}

fn expand(symbol: &str, depth: usize, cfg: &TreebankConfig, rng: &mut ChaCha8Rng, out: &mut String) {
    out.push('(');
    out.push_str(symbol);
    let options = rules(symbol);
    if options.is_empty() {
        out.push(' ');
        out.push_str(words(symbol).choose(rng).expect("every tag has words"));
        out.push(')');
        return;
    }
    let allowed: Vec<&Rule> = options.iter().filter(|r| depth < cfg.max_depth || !r.recursive).collect();
    let dist = WeightedIndex::new(allowed.iter().map(|r| r.weight)).expect("each symbol has a base rule");
    for child in allowed[dist.sample(rng)].rhs {
        out.push(' ');
        expand(child, depth + 1, cfg, rng, out);
    }
    out.push(')');
}

/// Generates `cfg.size` bracketed sentences rooted at `S`.
pub fn generate_treebank(cfg: &TreebankConfig) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.size)
        .map(|_| {
            let mut s = String::new();
            expand("S", 0, cfg, &mut rng, &mut s);
            s
        })
        .collect()
}
