//! Learning curves of an SSTK and a symbol-aware kernel with a separate `S`
//! group, on targets whose prior weights sentence-level structure heavily.
//!
//! `cargo run --release --example sasstk_comparison -- [sizes] [repetitions]`

use std::time::Instant;

use treegp::synth::{run_sasstk_comparison, GeneratingModel, RecoveryConfig, TreePool, TreebankConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = RecoveryConfig {
        sizes: vec![50, 100, 200],
        generating: GeneratingModel::sasstk_s(),
        ..Default::default()
    };
    if let Some(s) = args.first() {
        cfg.sizes = s.split(',').map(str::parse).collect::<Result<_, _>>()?;
    }
    if let Some(r) = args.get(1) {
        cfg.repetitions = r.parse()?;
    }
    let start = Instant::now();
    let pool = TreePool::generated(&TreebankConfig::default())?;
    let report = run_sasstk_comparison(&pool, &cfg)?;
    println!("size  mean RMSE sstk  mean RMSE sasstk  sasstk wins");
    for s in &report.summaries {
        println!(
            "{:>4}  {:>14.4}  {:>16.4}  {:>5}/{}",
            s.size, s.mean_sstk_rmse, s.mean_sasstk_rmse, s.sasstk_wins, cfg.repetitions
        );
    }
    println!("{:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
