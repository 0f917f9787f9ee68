//! One complete optimization run per scheme on the same scenario, with the
//! outer objective traces and the final allocation summary.
//!
//! ```sh
//! cargo run --example full_run
//! ```

use mecsim::orchestrator::run;
use mecsim::{Scenario, Scheme, SolverConfig, SystemConfig, TaskCatalog, TaskSet};

fn main() -> anyhow::Result<()> {
    let cfg = SystemConfig {
        rng_seed: 11,
        ..SystemConfig::default()
    };
    let catalog = TaskCatalog::default();
    let solver = SolverConfig::default();
    let scenario = Scenario::generate(&cfg)?;
    let tasks = TaskSet::generate(&cfg, &catalog);

    for scheme in [Scheme::Proposed, Scheme::Ac, Scheme::Wcr] {
        let trace = run(scheme, &scenario, &tasks, &catalog, &cfg, &solver)?;
        let offloaders = trace.decision.offload.iter().filter(|&&x| x).count();
        let max_ratio = trace
            .decision
            .ratio
            .iter()
            .cloned()
            .fold(1.0f64, f64::max);
        println!("== {} ==", scheme.name());
        println!("  objective trace: {:?}", trace.outer_objectives);
        println!(
            "  converged {} in {} iterations ({:.1} ms)",
            trace.converged,
            trace.iterations,
            trace.wall_time_s * 1e3
        );
        println!(
            "  {offloaders}/{} users offload, max compression ratio {max_ratio:.1}, feasible {}",
            cfg.num_users, trace.report.feasible
        );
    }
    Ok(())
}
