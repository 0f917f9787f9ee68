//! Per-iteration objective traces for all three schemes on a batch of
//! seeds, written to `convergence.csv` for plotting.
//!
//! ```sh
//! cargo run --release --example convergence_trace
//! ```

use std::path::Path;

use mecsim::experiment::{emit_csv, run_experiment, ExperimentSpec};
use mecsim::{Scheme, SolverConfig, SystemConfig, TaskCatalog};

fn main() -> anyhow::Result<()> {
    let spec = ExperimentSpec::convergence(
        0,
        5,
        vec![Scheme::Proposed, Scheme::Ac, Scheme::Wcr],
    );
    let table = run_experiment(
        &spec,
        &SystemConfig::default(),
        &TaskCatalog::default(),
        &SolverConfig::default(),
    )?;
    let out = Path::new("convergence.csv");
    emit_csv(&table, out)?;
    println!("{} rows written to {}", table.rows.len(), out.display());

    // Show the first seed's traces inline.
    println!("\nseed 0 objective traces:");
    for row in table.rows.iter().filter(|r| r[3] == "0") {
        println!("  iter {:>2} [{:>8}] {}", row[0], row[2], row[1]);
    }
    Ok(())
}
