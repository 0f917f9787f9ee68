//! Experiment CLI: single runs, convergence traces and parameter sweeps.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use mecsim::experiment::{emit_csv, run_experiment, trace_table, ExperimentSpec};
use mecsim::orchestrator::{feasible_fraction, run, Scheme};
use mecsim::{parse_config, Scenario, SolverConfig, SystemConfig, TaskCatalog, TaskSet};

#[derive(Parser)]
#[command(name = "mecsim", about = "MEC offloading and semantic-compression experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file (`key = value` lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Schemes to run, comma separated.
    #[arg(long, default_value = "proposed,ac,wcr")]
    schemes: String,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// One full run per scheme on a single seed; prints a summary.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Per-iteration objective traces over seeds.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Number of seeds.
        #[arg(long, default_value_t = 1)]
        seeds: usize,
    },
    /// Utility versus total number of users at several bandwidths.
    SweepUsers {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// User counts, comma separated.
        #[arg(long)]
        users: Option<String>,
    },
    /// Utility versus MEC capacity at several bandwidths.
    SweepCapacity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Capacities in cycles/s, comma separated.
        #[arg(long)]
        capacities: Option<String>,
    },
}

fn load(common: &Common) -> anyhow::Result<(SystemConfig, TaskCatalog, SolverConfig, Vec<Scheme>)> {
    let (cfg, catalog, solver) = match &common.config {
        Some(path) => parse_config(path).with_context(|| format!("reading {}", path.display()))?,
        None => (
            SystemConfig::default(),
            TaskCatalog::default(),
            SolverConfig::default(),
        ),
    };
    let schemes = common
        .schemes
        .split(',')
        .map(Scheme::parse)
        .collect::<mecsim::Result<Vec<_>>>()?;
    Ok((cfg, catalog, solver, schemes))
}

fn parse_values(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("`{v}` is not a number"))
        })
        .collect()
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { common } => {
            let (mut cfg, catalog, solver, schemes) = load(&common)?;
            cfg.rng_seed = common.seed;
            let scenario = Scenario::generate(&cfg)?;
            let tasks = TaskSet::generate(&cfg, &catalog);
            let fraction = feasible_fraction(&scenario, &tasks, &catalog, &cfg);
            println!(
                "seed {}: {} users, {} SBS, feasible fraction {:.3}",
                cfg.rng_seed, cfg.num_users, cfg.num_sbs, fraction
            );
            let mut traces = Vec::new();
            for &scheme in &schemes {
                let trace = run(scheme, &scenario, &tasks, &catalog, &cfg, &solver)?;
                let offloaders = trace.decision.offload.iter().filter(|&&x| x).count();
                println!(
                    "{:>9}: utility {:.6}, {} iterations, converged {}, {} offloaders",
                    scheme.name(),
                    trace.final_utility(),
                    trace.iterations,
                    trace.converged,
                    offloaders
                );
                traces.push((cfg.rng_seed, trace));
            }
            if let Some(out) = common.out {
                emit_csv(&trace_table(&traces), &out)?;
                println!("trace written to {}", out.display());
            }
            Ok(())
        }
        Command::Convergence { common, seeds } => {
            let (cfg, catalog, solver, schemes) = load(&common)?;
            let spec = ExperimentSpec::convergence(common.seed, seeds, schemes);
            let table = run_experiment(&spec, &cfg, &catalog, &solver)?;
            write_or_print(&table, common.out.as_deref())
        }
        Command::SweepUsers {
            common,
            seeds,
            users,
        } => {
            let (cfg, catalog, solver, schemes) = load(&common)?;
            let mut spec = ExperimentSpec::sweep_users(common.seed, seeds, schemes);
            if let Some(text) = users {
                spec.sweep_values = parse_values(&text)?;
            }
            let table = run_experiment(&spec, &cfg, &catalog, &solver)?;
            check_some_feasible(&table)?;
            write_or_print(&table, common.out.as_deref())
        }
        Command::SweepCapacity {
            common,
            seeds,
            capacities,
        } => {
            let (cfg, catalog, solver, schemes) = load(&common)?;
            let mut spec = ExperimentSpec::sweep_capacity(common.seed, seeds, schemes);
            if let Some(text) = capacities {
                spec.sweep_values = parse_values(&text)?;
            }
            let table = run_experiment(&spec, &cfg, &catalog, &solver)?;
            check_some_feasible(&table)?;
            write_or_print(&table, common.out.as_deref())
        }
    }
}

fn check_some_feasible(table: &mecsim::experiment::CsvTable) -> anyhow::Result<()> {
    let feasible = table
        .rows
        .iter()
        .any(|r| r[5].parse::<f64>().map(|u| u.is_finite()).unwrap_or(false));
    if !feasible {
        bail!("every seed of the sweep was infeasible");
    }
    Ok(())
}

fn write_or_print(
    table: &mecsim::experiment::CsvTable,
    out: Option<&std::path::Path>,
) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            emit_csv(table, path)?;
            println!("{} rows written to {}", table.rows.len(), path.display());
        }
        None => {
            println!("{}", table.header.join(","));
            for row in &table.rows {
                println!("{}", row.join(","));
            }
        }
    }
    Ok(())
}
