//! Recovers SSTK hyperparameters from targets sampled out of a known prior.
//!
//! Run with `cargo run --release --example recovery -- [sizes] [repetitions]`,
//! e.g. `-- 50,200 3`.

use std::time::Instant;

use treegp::synth::{run_recovery, RecoveryConfig, TreePool, TreebankConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = RecoveryConfig::default();
    if let Some(s) = args.first() {
        cfg.sizes = s.split(',').map(str::parse).collect::<Result<_, _>>()?;
    }
    if let Some(r) = args.get(1) {
        cfg.repetitions = r.parse()?;
    }
    let start = Instant::now();
    let pool = TreePool::generated(&TreebankConfig::default())?;
    let report = run_recovery(&pool, &cfg)?;
    println!("pool: {} (prior jitter {:e})", report.pool, report.prior_jitter);
    for s in &report.summaries {
        println!("size {:>4}  median test RMSE {:.4}", s.size, s.median_test_rmse);
        for p in &s.params {
            println!(
                "    {:<14} truth {:>8.4}  log10 median {:>7.3}  [{:>7.3}, {:>7.3}]  |err| {:.3}",
                p.name, p.truth, p.log10_median, p.log10_q1, p.log10_q3, p.median_abs_log10_error
            );
        }
    }
    println!("{:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
