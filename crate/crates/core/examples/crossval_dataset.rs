//! Five-fold cross-validation through the command-line front end, writing
//! reports to a temporary directory.

use treegp::cli::{args::Cli, run};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    use clap::Parser;
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let out = std::env::temp_dir().join("treegp-crossval-example");
    let trees = format!("{data}/synth200.trees");
    let targets = format!("{data}/synth200.targets");
    let cli = Cli::parse_from([
        "treegp", "crossval", "--trees", &trees, "--targets", &targets, "--restarts", "3", "--out", out.to_str().unwrap(),
    ]);
    run(cli)?;
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("crossval.json"))?)?;
    let agg = &report["results"]["aggregate"];
    println!("reports in {}", out.display());
    println!(
        "RMSE {:.4}  MAE {:.4}  Pearson {:.4}  mean-baseline RMSE {:.4}  reduction {:.1}%",
        agg["rmse"].as_f64().unwrap(),
        agg["mae"].as_f64().unwrap(),
        agg["pearson"].as_f64().unwrap(),
        agg["baseline_rmse"].as_f64().unwrap(),
        100.0 * agg["rmse_reduction"].as_f64().unwrap()
    );
    Ok(())
}
