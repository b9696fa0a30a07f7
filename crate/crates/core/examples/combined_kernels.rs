//! Two tree slots plus a dense feature under sum and product kernels, on
//! targets that depend on both the trees and the feature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treegp::gp::{rmse, GpModel};
use treegp::kernels::{Input, KernelSpec, TyingScheme};
use treegp::opt::{optimize, OptimizeConfig};
use treegp::synth::{generate_treebank, TreebankConfig};
use treegp::trees::{parse_bracketed, ParsedTree, SymbolTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut table = SymbolTable::new();
    let src = generate_treebank(&TreebankConfig { size: 120, seed: 1, max_depth: 3 });
    let tgt = generate_treebank(&TreebankConfig { size: 120, seed: 2, max_depth: 3 });
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut inputs = Vec::new();
    let mut y = Vec::new();
    for (s, t) in src.iter().zip(&tgt) {
        let a = parse_bracketed(s, &mut table)?;
        let b = parse_bracketed(t, &mut table)?;
        let count = |tree: &ParsedTree, sym: &str| tree.nodes().iter().filter(|n| table.symbol_text(n.symbol) == sym).count() as f64;
        let x = rng.gen_range(-1.0..1.0);
        y.push(0.3 * count(&a, "PP") + 0.2 * count(&b, "NP") + 0.5 * x + rng.gen_range(-0.05..0.05));
        inputs.push(Input { trees: vec![a, b], features: Some(vec![x]) });
    }

    let tree = |slot| KernelSpec::tree(TyingScheme::tied()).with_slot(slot).normalized(true);
    for (label, spec) in [
        ("sum", KernelSpec::Sum { children: vec![tree(0), tree(1), KernelSpec::Rbf { dim: 1 }] }),
        ("product", KernelSpec::Product { children: vec![tree(0), tree(1), KernelSpec::Rbf { dim: 1 }] }),
        ("features only", KernelSpec::Rbf { dim: 1 }),
    ] {
        let model = GpModel::new(&spec, inputs[..90].to_vec(), y[..90].to_vec(), &table)?;
        let out = optimize(&model, &OptimizeConfig { restarts: 3, seed: 1, ..Default::default() })?;
        let pred = out.fitted.predict(&inputs[90..])?;
        println!("{label:<14} lml {:>8.3}  test RMSE {:.4}", out.lml, rmse(&pred.mean, &y[90..])?);
        for (n, v) in spec.param_names().iter().zip(&out.theta) {
            println!("    {n:<22} {v:.4}");
        }
    }
    Ok(())
}
