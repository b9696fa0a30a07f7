//! Analytic kernel and marginal-likelihood gradients next to central finite
//! differences on a small treebank.

use treegp::gp::GpModel;
use treegp::kernels::{GramEngine, KernelSpec, TyingScheme};
use treegp::synth::{sample_prior_targets, TreePool, TreebankConfig};

fn fd(x: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * x[i];
            let (mut up, mut down) = (x.to_vec(), x.to_vec());
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pool = TreePool::generated(&TreebankConfig { size: 30, seed: 1, max_depth: 3 })?;
    let spec = KernelSpec::tree(TyingScheme::subset(&[vec!["S"], vec!["NP", "VP"]])).normalized(true);
    let names = spec.param_names();
    let theta = vec![0.6, 0.3, 0.2, 1.0, 0.8, 0.5];

    let engine = GramEngine::new(&spec, pool.inputs(), &pool.table)?;
    let g = engine.gram_with_grads(&theta)?;
    let numeric = fd(&theta, |p| engine.gram(p).unwrap()[(0, 1)]);
    println!("normalized k(t0, t1) = {:.6}", g.k[(0, 1)]);
    for (i, name) in names.iter().enumerate() {
        println!("    {name:<16} analytic {:>12.6e}  numeric {:>12.6e}", g.dk[i][(0, 1)], numeric[i]);
    }

    let y = sample_prior_targets(&pool.inputs(), &spec, &theta, 0.05, 7, &pool.table)?;
    let model = GpModel::new(&spec, pool.inputs(), y, &pool.table)?;
    let mut x = theta.clone();
    x.push(0.05);
    let p = theta.len();
    let fit = model.fit_with_gradients(&x[..p], x[p])?;
    let analytic = fit.lml_gradient()?;
    let numeric = fd(&x, |q| model.fit(&q[..p], q[p]).unwrap().log_marginal_likelihood().total);
    println!("\nlog marginal likelihood = {:.6}", fit.log_marginal_likelihood().total);
    for (i, name) in names.iter().chain(std::iter::once(&"noise".to_string())).enumerate() {
        println!("    {name:<16} analytic {:>12.6e}  numeric {:>12.6e}", analytic[i], numeric[i]);
    }
    Ok(())
}
