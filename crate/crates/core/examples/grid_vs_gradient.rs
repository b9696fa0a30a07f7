//! Wall-clock versus test RMSE for gradient-based selection at growing
//! iteration budgets and grid search at growing granularity, on one thread.
//!
//! `cargo run --release --example grid_vs_gradient -- [runs]`

use treegp::synth::{run_time_benchmark, BenchmarkConfig, TreePool, TreebankConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = BenchmarkConfig::default();
    if let Some(r) = std::env::args().nth(1) {
        cfg.runs = r.parse()?;
    }
    let pool = TreePool::generated(&TreebankConfig::default())?;
    let report = run_time_benchmark(&pool, &cfg)?;
    println!("method    setting  mean seconds  mean RMSE  std RMSE");
    for s in &report.summaries {
        println!("{:<8}  {:>7}  {:>12.3}  {:>9.4}  {:>8.4}", s.method, s.setting, s.mean_seconds, s.mean_rmse, s.std_rmse);
    }
    println!("{:#?}", report.verdict);
    Ok(())
}
