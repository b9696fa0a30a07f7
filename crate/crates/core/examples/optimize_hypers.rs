//! Marginal-likelihood ascent with random restarts against a cross-validated
//! grid search on the bundled dataset.

use std::time::Instant;

use treegp::gp::{rmse, GpModel};
use treegp::kernels::{KernelSpec, TyingScheme};
use treegp::opt::{grid_search, optimize, GridSpec, OptimizeConfig};
use treegp::synth::TreePool;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let pool = TreePool::from_file(format!("{dir}/synth200.trees").as_ref())?;
    let y: Vec<f64> = std::fs::read_to_string(format!("{dir}/synth200.targets"))?
        .lines()
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    let inputs = pool.inputs();
    let spec = KernelSpec::tree(TyingScheme::tied()).normalized(true);
    let model = GpModel::new(&spec, inputs[..150].to_vec(), y[..150].to_vec(), &pool.table)?;
    let names = spec.param_names();

    let start = Instant::now();
    let out = optimize(&model, &OptimizeConfig { restarts: 5, seed: 3, ..Default::default() })?;
    println!("gradient: lml {:.3} in {:.2}s", out.lml, start.elapsed().as_secs_f64());
    for (i, r) in out.trace.restarts.iter().enumerate() {
        println!("    restart {i}: {:?} after {} steps, lml {:?}", r.status, r.iterations.len() - 1, r.final_lml);
    }
    let pred = out.fitted.predict(&inputs[150..])?;
    println!("    {names:?} = {:.4?}, noise {:.4}, test RMSE {:.4}", out.theta, out.noise, rmse(&pred.mean, &y[150..])?);

    let start = Instant::now();
    let grid = GridSpec::performance(&spec, 4);
    let g = grid_search(&model, &grid, 3)?;
    let pred = g.fitted.predict(&inputs[150..])?;
    println!(
        "grid ({} points): {:.4?}, noise {:.4}, cv RMSE {:.4}, test RMSE {:.4} in {:.2}s",
        grid.point_count(),
        g.theta,
        g.noise,
        g.cv_rmse,
        rmse(&pred.mean, &y[150..])?,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
