//! Fits a GP at fixed hyperparameters and predicts held-out trees with
//! variances.

use treegp::gp::{metrics, GpModel};
use treegp::kernels::{KernelSpec, TyingScheme};
use treegp::synth::TreePool;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let pool = TreePool::from_file(format!("{dir}/synth200.trees").as_ref())?;
    let y: Vec<f64> = std::fs::read_to_string(format!("{dir}/synth200.targets"))?
        .lines()
        .map(str::parse)
        .collect::<Result<_, _>>()?;

    let inputs = pool.inputs();
    let (train, test) = inputs.split_at(150);
    let spec = KernelSpec::tree(TyingScheme::tied()).normalized(true);
    let model = GpModel::new(&spec, train.to_vec(), y[..150].to_vec(), &pool.table)?;
    let fit = model.fit(&[0.2, 1.0], 0.01)?;
    let lml = fit.log_marginal_likelihood();
    println!(
        "lml {:.3} = data fit {:.3} + complexity {:.3} + constant {:.3}  (jitter {})",
        lml.total, lml.data_fit, lml.complexity, lml.constant, fit.jitter()
    );

    let pred = fit.predict(test)?;
    for i in 0..5 {
        println!("    y {:>7.3}  mean {:>7.3}  sd {:.3}", y[150 + i], pred.mean[i], pred.variance[i].sqrt());
    }
    let m = metrics(&pred.mean, &y[150..])?;
    println!("test RMSE {:.4}  MAE {:.4}  Pearson {:.4}", m.rmse, m.mae, m.pearson);
    Ok(())
}
