//! Utility versus MEC server capacity at 10 and 50 MHz, averaged over
//! seeds, written to `sweep_capacity.csv`.
//!
//! ```sh
//! cargo run --release --example sweep_capacity
//! ```

use std::path::Path;

use mecsim::experiment::{emit_csv, mean_utility_by_value, run_experiment, ExperimentSpec};
use mecsim::{Scheme, SolverConfig, SystemConfig, TaskCatalog};

fn main() -> anyhow::Result<()> {
    let spec = ExperimentSpec::sweep_capacity(
        0,
        10,
        vec![Scheme::Proposed, Scheme::Ac, Scheme::Wcr],
    );
    let table = run_experiment(
        &spec,
        &SystemConfig::default(),
        &TaskCatalog::default(),
        &SolverConfig::default(),
    )?;
    let out = Path::new("sweep_capacity.csv");
    emit_csv(&table, out)?;
    println!("{} rows written to {}", table.rows.len(), out.display());

    for &bw in &[10e6, 50e6] {
        println!("\nseed-mean utility at {} MHz:", bw / 1e6);
        println!(
            "{:>12} {:>12} {:>12} {:>12}",
            "Gcycle/s", "proposed", "ac", "wcr"
        );
        let proposed = mean_utility_by_value(&table, Scheme::Proposed, bw);
        let ac = mean_utility_by_value(&table, Scheme::Ac, bw);
        let wcr = mean_utility_by_value(&table, Scheme::Wcr, bw);
        for i in 0..proposed.len() {
            println!(
                "{:>12} {:>12.3} {:>12.3} {:>12.3}",
                proposed[i].0 / 1e9,
                proposed[i].1,
                ac[i].1,
                wcr[i].1
            );
        }
    }
    Ok(())
}
