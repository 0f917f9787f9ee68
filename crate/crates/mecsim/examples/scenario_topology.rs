//! Generate a small-cell scenario and dump it as CSV: SBS placement,
//! user drops, association, subcarriers, serving gains and uplink rates.
//!
//! ```sh
//! cargo run --example scenario_topology
//! ```

use mecsim::experiment::scenario_table;
use mecsim::{Scenario, SystemConfig};

fn main() -> anyhow::Result<()> {
    let cfg = SystemConfig {
        rng_seed: 7,
        ..SystemConfig::default()
    };
    let scenario = Scenario::generate(&cfg)?;

    println!("# SBS positions");
    for (k, p) in scenario.sbs_positions.iter().enumerate() {
        println!("#   SBS {k}: ({:.1}, {:.1}) m", p[0], p[1]);
    }

    let rates_mbps: Vec<f64> = scenario.rate.iter().map(|r| r / 1e6).collect();
    let min = rates_mbps.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = rates_mbps.iter().cloned().fold(0.0, f64::max);
    println!("# uplink rates span {min:.4} .. {max:.4} Mbit/s");

    let table = scenario_table(&scenario);
    println!("{}", table.header.join(","));
    for row in &table.rows {
        println!("{}", row.join(","));
    }
    Ok(())
}
