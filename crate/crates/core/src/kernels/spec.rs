use serde::{Deserialize, Serialize};

use super::scheme::{AlphaMode, TyingScheme};
use crate::trees::ParsedTree;

/// One GP input: any number of tree slots plus an optional dense vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Input {
    pub trees: Vec<ParsedTree>,
    pub features: Option<Vec<f64>>,
}

impl Input {
    pub fn tree(tree: ParsedTree) -> Self {
        Input { trees: vec![tree], features: None }
    }

    pub fn trees(trees: Vec<ParsedTree>) -> Self {
        Input { trees, features: None }
    }

    pub fn dense(features: Vec<f64>) -> Self {
        Input { trees: Vec::new(), features: Some(features) }
    }
}

/// Composable kernel description.
///
/// The flattened hyperparameter vector visits leaves depth-first. A tree leaf
/// contributes `λ` for each group followed by `α` for each group (omitted when
/// α is fixed at 1); an RBF leaf contributes its variance then lengthscale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    Tree {
        slot: usize,
        scheme: TyingScheme,
        normalized: bool,
        alpha: AlphaMode,
    },
    Rbf {
        dim: usize,
    },
    Sum {
        children: Vec<KernelSpec>,
    },
    Product {
        children: Vec<KernelSpec>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Lambda,
    Alpha,
    RbfVariance,
    RbfLengthscale,
}

impl KernelSpec {
    pub fn tree(scheme: TyingScheme) -> Self {
        KernelSpec::Tree { slot: 0, scheme, normalized: true, alpha: AlphaMode::Free }
    }

    pub fn sstk() -> Self {
        Self::tree(TyingScheme::tied())
    }

    pub fn with_slot(mut self, s: usize) -> Self {
        if let KernelSpec::Tree { slot, .. } = &mut self {
            *slot = s;
        }
        self
    }

    pub fn normalized(mut self, on: bool) -> Self {
        if let KernelSpec::Tree { normalized, .. } = &mut self {
            *normalized = on;
        }
        self
    }

    pub fn alpha_mode(mut self, mode: AlphaMode) -> Self {
        if let KernelSpec::Tree { alpha, .. } = &mut self {
            *alpha = mode;
        }
        self
    }

    pub fn leaves(&self) -> Vec<&KernelSpec> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a KernelSpec>) {
        match self {
            KernelSpec::Sum { children } | KernelSpec::Product { children } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
            leaf => out.push(leaf),
        }
    }

    /// Parameter count of a single leaf (zero for combinators).
    pub(crate) fn leaf_param_count(&self) -> usize {
        match self {
            KernelSpec::Tree { scheme, alpha, .. } => {
                let k = scheme.group_count();
                match alpha {
                    AlphaMode::Free => 2 * k,
                    AlphaMode::FixedAtOne => k,
                }
            }
            KernelSpec::Rbf { .. } => 2,
            _ => 0,
        }
    }

    pub fn param_count(&self) -> usize {
        self.leaves().iter().map(|l| l.leaf_param_count()).sum()
    }

    pub fn param_kinds(&self) -> Vec<ParamKind> {
        let mut out = Vec::new();
        for leaf in self.leaves() {
            match leaf {
                KernelSpec::Tree { scheme, alpha, .. } => {
                    out.extend(std::iter::repeat(ParamKind::Lambda).take(scheme.group_count()));
                    if *alpha == AlphaMode::Free {
                        out.extend(std::iter::repeat(ParamKind::Alpha).take(scheme.group_count()));
                    }
                }
                KernelSpec::Rbf { .. } => out.extend([ParamKind::RbfVariance, ParamKind::RbfLengthscale]),
                _ => {}
            }
        }
        out
    }

    /// Report names: `lambda.<group>`, `alpha.<group>`, `rbf.variance`,
    /// `rbf.lengthscale`. With several leaves each name is prefixed `k<i>.`.
    pub fn param_names(&self) -> Vec<String> {
        let leaves = self.leaves();
        let multi = leaves.len() > 1;
        let mut out = Vec::new();
        for (i, leaf) in leaves.iter().enumerate() {
            let prefix = if multi { format!("k{i}.") } else { String::new() };
            match leaf {
                KernelSpec::Tree { scheme, alpha, .. } => {
                    out.extend(scheme.group_names().iter().map(|g| format!("{prefix}lambda.{g}")));
                    if *alpha == AlphaMode::Free {
                        out.extend(scheme.group_names().iter().map(|g| format!("{prefix}alpha.{g}")));
                    }
                }
                KernelSpec::Rbf { .. } => {
                    out.push(format!("{prefix}rbf.variance"));
                    out.push(format!("{prefix}rbf.lengthscale"));
                }
                _ => {}
            }
        }
        out
    }

    /// A neutral starting point: λ = 0.4, α = 1, unit RBF variance and lengthscale.
    pub fn default_params(&self) -> Vec<f64> {
        self.param_kinds()
            .into_iter()
            .map(|k| match k {
                ParamKind::Lambda => 0.4,
                _ => 1.0,
            })
            .collect()
    }

    /// Builds a tree-leaf parameter vector from uniform λ/α values.
    pub fn uniform_params(&self, lambda: f64, alpha: f64) -> Vec<f64> {
        self.param_kinds()
            .into_iter()
            .map(|k| match k {
                ParamKind::Lambda => lambda,
                ParamKind::Alpha => alpha,
                _ => 1.0,
            })
            .collect()
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, KernelSpec::Tree { .. } | KernelSpec::Rbf { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{parse_bracketed, SymbolTable};

    #[test]
    fn single_leaf_names() {
        let spec = KernelSpec::sstk();
        assert_eq!(spec.param_names(), vec!["lambda.all", "alpha.all"]);
        let fixed = KernelSpec::sstk().alpha_mode(AlphaMode::FixedAtOne);
        assert_eq!(fixed.param_names(), vec!["lambda.all"]);
        assert_eq!(fixed.param_count(), 1);
    }

    #[test]
    fn combined_names_are_prefixed() {
        let spec = KernelSpec::Product {
            children: vec![KernelSpec::sstk(), KernelSpec::sstk().with_slot(1), KernelSpec::Rbf { dim: 3 }],
        };
        assert_eq!(
            spec.param_names(),
            vec![
                "k0.lambda.all",
                "k0.alpha.all",
                "k1.lambda.all",
                "k1.alpha.all",
                "k2.rbf.variance",
                "k2.rbf.lengthscale"
            ]
        );
        assert_eq!(spec.param_count(), 6);
    }

    #[test]
    fn full_scheme_layout() {
        let mut t = SymbolTable::new();
        parse_bracketed("(S (A a))", &mut t).unwrap();
        let spec = KernelSpec::tree(TyingScheme::full(&t));
        assert_eq!(
            spec.param_names(),
            vec!["lambda.A", "lambda.S", "lambda.other", "alpha.A", "alpha.S", "alpha.other"]
        );
    }

    #[test]
    fn serde_round_trip() {
        let spec = KernelSpec::Sum { children: vec![KernelSpec::sstk(), KernelSpec::Rbf { dim: 17 }] };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<KernelSpec>(&json).unwrap(), spec);
    }
}
