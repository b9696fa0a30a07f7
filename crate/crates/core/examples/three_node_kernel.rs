//! Subset tree kernel of a three-node tree with itself, checked against the
//! closed form `2λ + λ(α + λ)²` and against fragment enumeration.

use treegp::kernels::oracle::brute_force_kernel;
use treegp::kernels::{sstk_delta_with_grads, TreeKernelHypers, TyingScheme};
use treegp::trees::{matching_node_pairs, parse_bracketed, SymbolTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut table = SymbolTable::new();
    let t = parse_bracketed("(S (A a) (B b))", &mut table)?;
    println!("tree: {}", t.display(&table));
    println!("matching node pairs: {:?}", matching_node_pairs(&t, &t)?);

    let tied = TyingScheme::tied().resolve(&table);
    println!("{:>6} {:>6} {:>10} {:>10} {:>10} {:>10}", "λ", "α", "k", "closed", "∂k/∂λ", "∂k/∂α");
    for (l, a) in [(1.0, 1.0), (1.0, 0.0), (0.5, 1.0), (0.1, 0.5)] {
        let e = sstk_delta_with_grads(&t, &t, &TreeKernelHypers::uniform(1, l, a), &tied)?;
        let closed = 2.0 * l + l * (a + l) * (a + l);
        println!("{l:>6} {a:>6} {:>10.4} {closed:>10.4} {:>10.4} {:>10.4}", e.value, e.d_lambda[0], e.d_alpha[0]);
    }

    // One λ per symbol; halving the root's λ halves the root's fragments.
    let scheme = TyingScheme::full(&table);
    let groups = scheme.resolve(&table);
    let lambda: Vec<f64> = scheme.group_names().iter().map(|g| if g == "S" { 0.5 } else { 1.0 }).collect();
    let h = TreeKernelHypers::new(lambda, vec![1.0; scheme.group_count()]);
    let e = sstk_delta_with_grads(&t, &t, &h, &groups)?;
    println!("\nper-symbol λ_S = 0.5: k = {} (enumeration: {})", e.value, brute_force_kernel(&t, &t, &h, &groups, 16)?);
    for (name, (dl, da)) in scheme.group_names().iter().zip(e.d_lambda.iter().zip(&e.d_alpha)) {
        println!("    {name:<6} ∂k/∂λ {dl:>6.3}  ∂k/∂α {da:>6.3}");
    }
    Ok(())
}
