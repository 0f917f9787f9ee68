//! Seeded experiment sweeps and CSV emission.
//!
//! Three experiment kinds: `convergence` traces the per-iteration objective
//! of every scheme on one config; `sweep-users` and `sweep-capacity` vary
//! the user count or the server budget over a grid of values and bandwidths,
//! averaging over seeds downstream. Cells run concurrently; rows come out
//! in a fixed order so repeated runs emit byte-identical files.

use std::path::Path;

use rayon::prelude::*;

use crate::config::{SolverConfig, SystemConfig};
use crate::error::{Error, Result};
use crate::orchestrator::{feasible_fraction, run, RunTrace, Scheme};
use crate::scenario::Scenario;
use crate::taskmodel::{ConstraintReport, TaskCatalog, TaskSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Convergence,
    SweepUsers,
    SweepCapacity,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::SweepUsers => "sweep-users",
            ExperimentKind::SweepCapacity => "sweep-capacity",
        }
    }
}

/// A sweep description: which axis, which values, how many seeds.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Sweep grid (user counts or budgets); strictly increasing.
    pub sweep_values: Vec<f64>,
    /// Bandwidths to repeat the sweep at, Hz.
    pub bandwidths_hz: Vec<f64>,
    pub num_seeds: usize,
    pub base_seed: u64,
    pub schemes: Vec<Scheme>,
}

impl ExperimentSpec {
    pub fn convergence(base_seed: u64, num_seeds: usize, schemes: Vec<Scheme>) -> Self {
        Self {
            kind: ExperimentKind::Convergence,
            sweep_values: Vec::new(),
            bandwidths_hz: Vec::new(),
            num_seeds,
            base_seed,
            schemes,
        }
    }

    pub fn sweep_users(base_seed: u64, num_seeds: usize, schemes: Vec<Scheme>) -> Self {
        Self {
            kind: ExperimentKind::SweepUsers,
            sweep_values: vec![10.0, 20.0, 30.0, 40.0, 50.0],
            bandwidths_hz: vec![10e6, 50e6],
            num_seeds,
            base_seed,
            schemes,
        }
    }

    pub fn sweep_capacity(base_seed: u64, num_seeds: usize, schemes: Vec<Scheme>) -> Self {
        Self {
            kind: ExperimentKind::SweepCapacity,
            sweep_values: vec![50e9, 100e9, 200e9, 400e9],
            bandwidths_hz: vec![10e6, 50e6],
            num_seeds,
            base_seed,
            schemes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_seeds < 1 {
            return Err(Error::InvalidValue {
                key: "seeds".into(),
                reason: "need at least one seed".into(),
            });
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidValue {
                key: "schemes".into(),
                reason: "need at least one scheme".into(),
            });
        }
        for w in self.sweep_values.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidValue {
                    key: "sweep values".into(),
                    reason: "must be strictly increasing".into(),
                });
            }
        }
        if self.kind != ExperimentKind::Convergence && self.sweep_values.is_empty() {
            return Err(Error::InvalidValue {
                key: "sweep values".into(),
                reason: "sweep needs at least one value".into(),
            });
        }
        Ok(())
    }
}

/// A header plus stringified rows, ready for [`emit_csv`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Decimal formatting used in every emitted table: 13 significant digits.
pub fn fmt_value(x: f64) -> String {
    format!("{x:.12e}")
}

fn strings<const N: usize>(cells: [String; N]) -> Vec<String> {
    cells.into_iter().collect()
}

/// Per-user scenario dump: position, serving SBS, subcarrier, gain, rate.
pub fn scenario_table(scenario: &Scenario) -> CsvTable {
    CsvTable {
        header: ["user", "x", "y", "sbs", "subcarrier", "gain", "rate"]
            .map(String::from)
            .to_vec(),
        rows: (0..scenario.num_users())
            .map(|u| {
                strings([
                    u.to_string(),
                    fmt_value(scenario.user_positions[u][0]),
                    fmt_value(scenario.user_positions[u][1]),
                    scenario.association[u].to_string(),
                    scenario.subcarrier[u].to_string(),
                    fmt_value(scenario.gain[u]),
                    fmt_value(scenario.rate[u]),
                ])
            })
            .collect(),
    }
}

/// Outer-objective trace rows for one run.
pub fn trace_table(traces: &[(u64, RunTrace)]) -> CsvTable {
    let mut rows = Vec::new();
    for (seed, trace) in traces {
        for (i, &objective) in trace.outer_objectives.iter().enumerate() {
            rows.push(strings([
                i.to_string(),
                fmt_value(objective),
                trace.scheme.name().to_string(),
                seed.to_string(),
            ]));
        }
    }
    CsvTable {
        header: ["iteration", "objective", "scheme", "seed"]
            .map(String::from)
            .to_vec(),
        rows,
    }
}

/// Constraint residual dump, one row per user plus one per SBS.
pub fn report_table(report: &ConstraintReport) -> CsvTable {
    let mut rows: Vec<Vec<String>> = report
        .user_checks
        .iter()
        .enumerate()
        .map(|(u, c)| {
            strings([
                format!("user:{u}"),
                c.ratio_ok.to_string(),
                c.capacity_ok.to_string(),
                fmt_value(c.delay_residual),
                fmt_value(c.accuracy_residual),
                c.feasible.to_string(),
            ])
        })
        .collect();
    for (k, &res) in report.sbs_capacity_residual.iter().enumerate() {
        rows.push(strings([
            format!("sbs:{k}"),
            String::new(),
            String::new(),
            fmt_value(res),
            String::new(),
            (res <= crate::taskmodel::CONSTRAINT_REL_TOL).to_string(),
        ]));
    }
    CsvTable {
        header: [
            "entity",
            "ratio_ok",
            "capacity_ok",
            "delay_or_budget_residual",
            "accuracy_residual",
            "feasible",
        ]
        .map(String::from)
        .to_vec(),
        rows,
    }
}

/// One sweep cell result.
#[derive(Debug, Clone)]
struct CellResult {
    scheme: Scheme,
    sweep_value: f64,
    bandwidth_hz: f64,
    seed: u64,
    utility: f64,
    iterations: usize,
    feasible_fraction: f64,
}

/// Run an experiment and return its CSV table. Sweep rows carry
/// `(experiment, scheme, sweep_value, bandwidth, seed, utility, iterations,
/// feasible_fraction)`; infeasible seeds yield a `NaN` utility row rather
/// than failing the sweep.
pub fn run_experiment(
    spec: &ExperimentSpec,
    cfg: &SystemConfig,
    catalog: &TaskCatalog,
    solver: &SolverConfig,
) -> Result<CsvTable> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::Convergence => {
            let mut traces = Vec::new();
            for seed in 0..spec.num_seeds as u64 {
                let cfg = SystemConfig {
                    rng_seed: spec.base_seed + seed,
                    ..cfg.clone()
                };
                let scenario = Scenario::generate(&cfg)?;
                let tasks = TaskSet::generate(&cfg, catalog);
                for &scheme in &spec.schemes {
                    traces.push((
                        cfg.rng_seed,
                        run(scheme, &scenario, &tasks, catalog, &cfg, solver)?,
                    ));
                }
            }
            Ok(trace_table(&traces))
        }
        ExperimentKind::SweepUsers | ExperimentKind::SweepCapacity => {
            let mut cells = Vec::new();
            for &value in &spec.sweep_values {
                for &bw in &spec.bandwidths_hz {
                    for &scheme in &spec.schemes {
                        for seed in 0..spec.num_seeds as u64 {
                            cells.push((value, bw, scheme, spec.base_seed + seed));
                        }
                    }
                }
            }
            let results: Vec<CellResult> = cells
                .par_iter()
                .map(|&(value, bw, scheme, seed)| {
                    let mut cell_cfg = SystemConfig {
                        bandwidth_hz: bw,
                        rng_seed: seed,
                        ..cfg.clone()
                    };
                    match spec.kind {
                        ExperimentKind::SweepUsers => cell_cfg.num_users = value as usize,
                        ExperimentKind::SweepCapacity => cell_cfg.mec_capacity = value,
                        ExperimentKind::Convergence => unreachable!(),
                    }
                    run_cell(&cell_cfg, catalog, solver, scheme, value, bw, seed)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CsvTable {
                header: [
                    "experiment",
                    "scheme",
                    "sweep_value",
                    "bandwidth",
                    "seed",
                    "utility",
                    "iterations",
                    "feasible_fraction",
                ]
                .map(String::from)
                .to_vec(),
                rows: results
                    .iter()
                    .map(|r| {
                        strings([
                            spec.kind.name().to_string(),
                            r.scheme.name().to_string(),
                            fmt_value(r.sweep_value),
                            fmt_value(r.bandwidth_hz),
                            r.seed.to_string(),
                            fmt_value(r.utility),
                            r.iterations.to_string(),
                            fmt_value(r.feasible_fraction),
                        ])
                    })
                    .collect(),
            })
        }
    }
}

fn run_cell(
    cfg: &SystemConfig,
    catalog: &TaskCatalog,
    solver: &SolverConfig,
    scheme: Scheme,
    sweep_value: f64,
    bandwidth_hz: f64,
    seed: u64,
) -> Result<CellResult> {
    let scenario = Scenario::generate(cfg)?;
    let tasks = TaskSet::generate(cfg, catalog);
    let fraction = feasible_fraction(&scenario, &tasks, catalog, cfg);
    match run(scheme, &scenario, &tasks, catalog, cfg, solver) {
        Ok(trace) => {
            debug_assert!(trace.report.feasible);
            Ok(CellResult {
                scheme,
                sweep_value,
                bandwidth_hz,
                seed,
                utility: trace.final_utility(),
                iterations: trace.iterations,
                feasible_fraction: fraction,
            })
        }
        Err(Error::InfeasibleUsers(_)) => Ok(CellResult {
            scheme,
            sweep_value,
            bandwidth_hz,
            seed,
            utility: f64::NAN,
            iterations: 0,
            feasible_fraction: fraction,
        }),
        Err(e) => Err(e),
    }
}

/// Seed-mean utility per sweep value for one scheme; skips NaN rows.
pub fn mean_utility_by_value(table: &CsvTable, scheme: Scheme, bandwidth_hz: f64) -> Vec<(f64, f64)> {
    let mut sums: Vec<(f64, f64, usize)> = Vec::new();
    for row in &table.rows {
        if row[1] != scheme.name() {
            continue;
        }
        let bw: f64 = row[3].parse().unwrap_or(f64::NAN);
        if (bw - bandwidth_hz).abs() > 1e-6 * bandwidth_hz {
            continue;
        }
        let value: f64 = row[2].parse().unwrap_or(f64::NAN);
        let utility: f64 = row[5].parse().unwrap_or(f64::NAN);
        if utility.is_nan() {
            continue;
        }
        match sums.iter_mut().find(|(v, _, _)| (*v - value).abs() <= 1e-9 * value.abs()) {
            Some((_, s, n)) => {
                *s += utility;
                *n += 1;
            }
            None => sums.push((value, utility, 1)),
        }
    }
    sums.into_iter()
        .map(|(v, s, n)| (v, s / n as f64))
        .collect()
}

/// Write a table atomically: temp file in the target directory, then rename
/// over the destination.
pub fn emit_csv(table: &CsvTable, path: &Path) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::Domain("refusing to emit an empty table".into()));
    }
    let mut text = String::new();
    text.push_str(&table.header.join(","));
    text.push('\n');
    for row in &table.rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    let tmp = path.with_extension("csv.tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_row_emits_two_lines() {
        let table = CsvTable {
            header: vec!["a".into(), "b".into()],
            rows: vec![vec!["1".into(), "2".into()]],
        };
        let dir = std::env::temp_dir().join("mecsim_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("one_row.csv");
        emit_csv(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n1,2\n");
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn identical_tables_emit_identical_bytes() {
        let table = CsvTable {
            header: vec!["v".into()],
            rows: vec![vec![fmt_value(1.0 / 3.0)], vec![fmt_value(2e9)]],
        };
        let dir = std::env::temp_dir().join("mecsim_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let p1 = dir.join("rep1.csv");
        let p2 = dir.join("rep2.csv");
        emit_csv(&table, &p1).unwrap();
        emit_csv(&table, &p2).unwrap();
        assert_eq!(
            std::fs::read(&p1).unwrap(),
            std::fs::read(&p2).unwrap()
        );
        // Overwriting in place leaves the same bytes.
        emit_csv(&table, &p1).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        std::fs::remove_file(&p1).unwrap();
        std::fs::remove_file(&p2).unwrap();
    }

    #[test]
    fn emitted_values_parse_back_to_full_precision() {
        for &x in &[1.0 / 3.0, 278.2346301748221, 1.331642296550359e6, 1e-13] {
            let parsed: f64 = fmt_value(x).parse().unwrap();
            assert!(
                (parsed - x).abs() <= 1e-12 * x.abs(),
                "{x} round-tripped to {parsed}"
            );
        }
    }

    #[test]
    fn empty_table_is_rejected() {
        let table = CsvTable {
            header: vec!["a".into()],
            rows: vec![],
        };
        let path = std::env::temp_dir().join("mecsim_empty.csv");
        assert!(emit_csv(&table, &path).is_err());
    }

    #[test]
    fn report_table_lists_users_and_sbs() {
        let cfg = SystemConfig {
            num_users: 3,
            rng_seed: 9,
            ..SystemConfig::default()
        };
        let catalog = TaskCatalog::default();
        let scenario = Scenario::generate(&cfg).unwrap();
        let tasks = TaskSet::generate(&cfg, &catalog);
        let decision = crate::taskmodel::Decision::all_local(3);
        let report =
            crate::taskmodel::check_constraints(&tasks, &decision, &scenario, &catalog, &cfg);
        let table = report_table(&report);
        assert_eq!(table.rows.len(), 3 + cfg.num_sbs);
        assert!(table.rows[0][0].starts_with("user:"));
        assert!(table.rows[3][0].starts_with("sbs:"));
        for row in &table.rows {
            assert_eq!(row.len(), table.header.len());
        }
    }

    #[test]
    fn small_sweep_produces_complete_rows() {
        let cfg = SystemConfig::default();
        let catalog = TaskCatalog::default();
        let solver = SolverConfig::default();
        let spec = ExperimentSpec {
            kind: ExperimentKind::SweepUsers,
            sweep_values: vec![5.0, 10.0],
            bandwidths_hz: vec![10e6],
            num_seeds: 2,
            base_seed: 0,
            schemes: vec![Scheme::Proposed],
        };
        let table = run_experiment(&spec, &cfg, &catalog, &solver).unwrap();
        assert_eq!(table.rows.len(), 2 * 2);
        for row in &table.rows {
            assert_eq!(row.len(), table.header.len());
            let utility: f64 = row[5].parse().unwrap();
            assert!(utility.is_finite());
        }
        let means = mean_utility_by_value(&table, Scheme::Proposed, 10e6);
        assert_eq!(means.len(), 2);
        assert!(means[1].1 > means[0].1, "more users should add utility");
    }

    #[test]
    fn seed_isolation_across_sweep_order() {
        let cfg = SystemConfig::default();
        let catalog = TaskCatalog::default();
        let solver = SolverConfig::default();
        let narrow = ExperimentSpec {
            kind: ExperimentKind::SweepCapacity,
            sweep_values: vec![100e9],
            bandwidths_hz: vec![10e6],
            num_seeds: 2,
            base_seed: 7,
            schemes: vec![Scheme::Proposed],
        };
        let wide = ExperimentSpec {
            sweep_values: vec![50e9, 100e9],
            ..narrow.clone()
        };
        let narrow_table = run_experiment(&narrow, &cfg, &catalog, &solver).unwrap();
        let wide_table = run_experiment(&wide, &cfg, &catalog, &solver).unwrap();
        let narrow_rows: Vec<_> = narrow_table
            .rows
            .iter()
            .filter(|r| r[2] == fmt_value(100e9))
            .collect();
        let wide_rows: Vec<_> = wide_table
            .rows
            .iter()
            .filter(|r| r[2] == fmt_value(100e9))
            .collect();
        assert_eq!(narrow_rows, wide_rows);
    }
}
