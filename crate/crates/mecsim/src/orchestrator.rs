//! Alternating outer loop: capacity allocation given offload/compression,
//! then compression-offloading given capacity, repeated until the system
//! utility settles. Also hosts the two baselines: AC splits each server
//! budget evenly across its offloaders, WCR forbids compression.
//!
//! Users whose offload branch is infeasible even with a full server budget
//! are pinned local before the loop; users feasible in neither branch abort
//! the run. A user that drops to local computing releases its capacity and
//! stays local (its offload delay is undefined without a share), so the
//! offload set only shrinks across iterations. Each compression step keeps
//! the better of the fresh rounded solution and the incumbent point per
//! user, which makes the outer objective trace non-decreasing.

use std::time::Instant;

use crate::capacity::{min_capacities, solve_capacity, CapacityInstance, CapacityUser, MinCapacity};
use crate::compression::{
    eta_bounds_true, init_anchor, local_branch, offload_branch, round_and_recover, sca_iterate,
    Anchor, CompressionInstance, RoundedDecision,
};
use crate::config::{SolverConfig, SystemConfig};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::taskmodel::{
    check_constraints, local_delay, overhead_cycles, system_utility, ConstraintReport, Decision,
    TaskCatalog, TaskSet,
};

/// The allocation scheme to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Alternating KKT capacity allocation and SCA compression offloading.
    Proposed,
    /// Capacity split evenly across each SBS's offloaders.
    Ac,
    /// No compression: offloading at ratio 1 only.
    Wcr,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Ac => "ac",
            Scheme::Wcr => "wcr",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" => Ok(Scheme::Proposed),
            "ac" => Ok(Scheme::Ac),
            "wcr" => Ok(Scheme::Wcr),
            other => Err(Error::InvalidValue {
                key: "scheme".into(),
                reason: format!("unknown scheme `{other}`"),
            }),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub scheme: Scheme,
    /// Objective after each outer iteration (plus the initial point when it
    /// is feasible).
    pub outer_objectives: Vec<f64>,
    /// SCA objective traces, one list per outer iteration.
    pub inner_traces: Vec<Vec<f64>>,
    pub decision: Decision,
    pub report: ConstraintReport,
    pub converged: bool,
    pub iterations: usize,
    pub wall_time_s: f64,
}

impl RunTrace {
    pub fn final_utility(&self) -> f64 {
        *self.outer_objectives.last().unwrap()
    }
}

/// Per-user constants shared by every step of a run.
struct UserCtx {
    volume: f64,
    delay_limit: f64,
    accuracy_limit: f64,
    local_delay: f64,
    /// Uplink time of the raw volume, seconds.
    transmit_time: f64,
    /// Cycles of the raw volume.
    raw_work: f64,
    local_ok: bool,
}

fn build_contexts(
    scenario: &Scenario,
    tasks: &TaskSet,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
) -> Vec<UserCtx> {
    (0..tasks.tasks.len())
        .map(|u| {
            let a = tasks.tasks[u].raw_volume;
            let task = tasks.task_type(u, catalog);
            let t_local = local_delay(a, cfg);
            let y_raw = catalog.fit.p - catalog.fit.q * a.powf(-catalog.fit.r);
            UserCtx {
                volume: a,
                delay_limit: task.delay_limit,
                accuracy_limit: task.accuracy_limit,
                local_delay: t_local,
                transmit_time: a * cfg.bits_per_unit / scenario.rate[u],
                raw_work: overhead_cycles(a, cfg),
                local_ok: t_local <= task.delay_limit && y_raw >= task.accuracy_limit,
            }
        })
        .collect()
}

fn build_instance(
    ctx: &UserCtx,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
    share: f64,
) -> CompressionInstance {
    CompressionInstance {
        local_delay: ctx.local_delay,
        offload_unit_delay: ctx.transmit_time + ctx.raw_work / share,
        offload_fixed_delay: cfg.overhead_intercept / share,
        raw_volume: ctx.volume,
        fit: catalog.fit,
        delay_limit: ctx.delay_limit,
        accuracy_limit: ctx.accuracy_limit,
        weight: cfg.utility_weight,
    }
}

fn offload_feasible(
    ctx: &UserCtx,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
    share: f64,
    wcr: bool,
) -> bool {
    let inst = build_instance(ctx, catalog, cfg, share);
    match eta_bounds_true(&inst) {
        Some((_, hi)) => !wcr || hi >= 1.0,
        None => false,
    }
}

/// Per-user flag: feasible in at least one branch (local, or offloading
/// with the whole server budget).
pub fn user_feasibility(
    scenario: &Scenario,
    tasks: &TaskSet,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
) -> Vec<bool> {
    let ctxs = build_contexts(scenario, tasks, catalog, cfg);
    ctxs.iter()
        .map(|ctx| ctx.local_ok || offload_feasible(ctx, catalog, cfg, cfg.mec_capacity, false))
        .collect()
}

/// Fraction of users feasible in at least one branch.
pub fn feasible_fraction(
    scenario: &Scenario,
    tasks: &TaskSet,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
) -> f64 {
    let flags = user_feasibility(scenario, tasks, catalog, cfg);
    flags.iter().filter(|&&ok| ok).count() as f64 / flags.len().max(1) as f64
}

/// Run the full alternating loop for the given scheme.
pub fn run(
    scheme: Scheme,
    scenario: &Scenario,
    tasks: &TaskSet,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
    solver: &SolverConfig,
) -> Result<RunTrace> {
    run_from(scheme, scenario, tasks, catalog, cfg, solver, None)
}

pub fn run_algorithm1(
    scenario: &Scenario,
    tasks: &TaskSet,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
    solver: &SolverConfig,
) -> Result<RunTrace> {
    run(Scheme::Proposed, scenario, tasks, catalog, cfg, solver)
}

pub fn run_ac(
    scenario: &Scenario,
    tasks: &TaskSet,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
    solver: &SolverConfig,
) -> Result<RunTrace> {
    run(Scheme::Ac, scenario, tasks, catalog, cfg, solver)
}

pub fn run_wcr(
    scenario: &Scenario,
    tasks: &TaskSet,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
    solver: &SolverConfig,
) -> Result<RunTrace> {
    run(Scheme::Wcr, scenario, tasks, catalog, cfg, solver)
}

/// Same as [`run`], optionally warm-starting from a previous decision.
pub fn run_from(
    scheme: Scheme,
    scenario: &Scenario,
    tasks: &TaskSet,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
    solver: &SolverConfig,
    init: Option<&Decision>,
) -> Result<RunTrace> {
    let start = Instant::now();
    cfg.validate()?;
    catalog.validate()?;
    solver.validate()?;
    scenario.validate(cfg)?;
    let num_users = tasks.tasks.len();
    let wcr = scheme == Scheme::Wcr;
    let ctxs = build_contexts(scenario, tasks, catalog, cfg);

    // Pin users that cannot offload even with the whole budget; abort when
    // a pinned user is not locally feasible either.
    let pinned: Vec<bool> = ctxs
        .iter()
        .map(|ctx| !offload_feasible(ctx, catalog, cfg, cfg.mec_capacity, wcr))
        .collect();
    let stuck: Vec<usize> = (0..num_users)
        .filter(|&u| pinned[u] && !ctxs[u].local_ok)
        .collect();
    if !stuck.is_empty() {
        return Err(Error::InfeasibleUsers(stuck));
    }

    let mut decision = match init {
        Some(d) => {
            if d.offload.len() != num_users {
                return Err(Error::Domain(format!(
                    "init decision covers {} users, scenario has {num_users}",
                    d.offload.len()
                )));
            }
            d.clone()
        }
        None => initial_decision(scenario, &ctxs, &pinned, catalog, cfg, wcr),
    };

    let mut outer_objectives = Vec::new();
    let mut inner_traces = Vec::new();
    if check_constraints(tasks, &decision, scenario, catalog, cfg).feasible {
        outer_objectives.push(system_utility(tasks, &decision, scenario, catalog, cfg)?);
    }

    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..solver.max_outer {
        iterations += 1;

        allocate_capacity(scheme, scenario, &ctxs, &mut decision, cfg)?;
        compression_step(scheme, &ctxs, &pinned, &mut decision, catalog, cfg, solver)
            .map(|trace| inner_traces.push(trace))?;

        let objective = system_utility(tasks, &decision, scenario, catalog, cfg)?;
        if let Some(&previous) = outer_objectives.last() {
            if (objective - previous).abs() <= solver.outer_tol {
                converged = true;
            }
        }
        outer_objectives.push(objective);
        if converged {
            break;
        }
    }

    let report = check_constraints(tasks, &decision, scenario, catalog, cfg);
    if !report.feasible {
        return Err(Error::Domain(
            "internal: emitted decision violates the constraint system".into(),
        ));
    }
    Ok(RunTrace {
        scheme,
        outer_objectives,
        inner_traces,
        decision,
        report,
        converged,
        iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Start from full offloading where feasible: capacity split evenly, eta at
/// the midpoint of each user's feasible interval (1 under WCR), local
/// elsewhere.
fn initial_decision(
    scenario: &Scenario,
    ctxs: &[UserCtx],
    pinned: &[bool],
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
    wcr: bool,
) -> Decision {
    let num_users = ctxs.len();
    let mut decision = Decision::all_local(num_users);
    let tentative: Vec<bool> = (0..num_users).map(|u| !pinned[u]).collect();
    let share0 = even_shares(scenario, &tentative, cfg);

    for u in 0..num_users {
        if pinned[u] {
            continue;
        }
        let at_tentative = offload_feasible(&ctxs[u], catalog, cfg, share0[u], wcr);
        let share = if at_tentative { share0[u] } else { cfg.mec_capacity };
        if !at_tentative && ctxs[u].local_ok {
            continue; // stays local
        }
        let inst = build_instance(&ctxs[u], catalog, cfg, share);
        if let Some(anchor) = init_anchor(&inst) {
            if anchor.x == 1.0 {
                decision.offload[u] = true;
                decision.ratio[u] = 1.0 / if wcr { 1.0 } else { anchor.eta };
            }
        }
    }

    let shares = even_shares(scenario, &decision.offload, cfg);
    for ((capacity, share), &offload) in decision
        .capacity
        .iter_mut()
        .zip(shares)
        .zip(&decision.offload)
    {
        *capacity = if offload { share } else { 0.0 };
    }
    decision
}

/// Even split of each SBS budget over its flagged users.
fn even_shares(scenario: &Scenario, offload: &[bool], cfg: &SystemConfig) -> Vec<f64> {
    let mut counts = vec![0usize; cfg.num_sbs];
    for (u, &flag) in offload.iter().enumerate() {
        if flag {
            counts[scenario.association[u]] += 1;
        }
    }
    offload
        .iter()
        .enumerate()
        .map(|(u, &flag)| {
            if flag {
                cfg.mec_capacity / counts[scenario.association[u]] as f64
            } else {
                0.0
            }
        })
        .collect()
}

/// Capacity step: per-SBS allocation over the current offloaders. A user
/// whose deadline cannot be met at any share, or who no longer fits the
/// budget, drops to local computing when that is feasible.
fn allocate_capacity(
    scheme: Scheme,
    scenario: &Scenario,
    ctxs: &[UserCtx],
    decision: &mut Decision,
    cfg: &SystemConfig,
) -> Result<()> {
    let num_users = ctxs.len();
    for sbs in 0..cfg.num_sbs {
        let members: Vec<usize> = (0..num_users)
            .filter(|&u| scenario.association[u] == sbs)
            .collect();
        if members.is_empty() {
            continue;
        }
        loop {
            let offloaders: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&u| decision.offload[u])
                .collect();
            if offloaders.is_empty() {
                break;
            }
            if scheme == Scheme::Ac {
                let share = cfg.mec_capacity / offloaders.len() as f64;
                for &u in &offloaders {
                    decision.capacity[u] = share;
                }
                break;
            }

            let instance = CapacityInstance {
                users: offloaders
                    .iter()
                    .map(|&u| {
                        let eta = decision.eta(u);
                        CapacityUser {
                            accuracy_const: 1.0,
                            fixed_delay: ctxs[u].transmit_time * eta,
                            work: cfg.overhead_slope * ctxs[u].volume * eta
                                + cfg.overhead_intercept,
                            delay_limit: ctxs[u].delay_limit,
                            offload: true,
                        }
                    })
                    .collect(),
                budget: cfg.mec_capacity,
            };

            let mins = min_capacities(&instance);
            let mut forced = false;
            for (i, m) in mins.iter().enumerate() {
                if matches!(m, MinCapacity::Infeasible) {
                    force_local(offloaders[i], ctxs, decision)?;
                    forced = true;
                }
            }
            if forced {
                continue;
            }

            match solve_capacity(&instance) {
                Ok(shares) => {
                    for (i, &u) in offloaders.iter().enumerate() {
                        decision.capacity[u] = shares[i];
                    }
                    break;
                }
                Err(Error::BudgetInfeasible { .. }) => {
                    // Drop the hungriest offloader that can compute locally.
                    let mut worst: Option<(usize, f64)> = None;
                    for (i, m) in mins.iter().enumerate() {
                        if let MinCapacity::Feasible(f_min) = m {
                            let u = offloaders[i];
                            if ctxs[u].local_ok
                                && worst.is_none_or(|(_, best)| *f_min > best)
                            {
                                worst = Some((u, *f_min));
                            }
                        }
                    }
                    match worst {
                        Some((u, _)) => force_local(u, ctxs, decision)?,
                        None => return Err(Error::InfeasibleUsers(offloaders)),
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    // Local users hold no capacity.
    for u in 0..num_users {
        if !decision.offload[u] {
            decision.capacity[u] = 0.0;
        }
    }
    Ok(())
}

fn force_local(u: usize, ctxs: &[UserCtx], decision: &mut Decision) -> Result<()> {
    if !ctxs[u].local_ok {
        return Err(Error::InfeasibleUsers(vec![u]));
    }
    decision.offload[u] = false;
    decision.ratio[u] = 1.0;
    decision.capacity[u] = 0.0;
    Ok(())
}

/// Compression step over the current offloaders. Under WCR this is a
/// branch comparison at ratio 1; otherwise an SCA pass plus rounding.
/// Either way the incumbent point is kept when it scores better, so the
/// per-user objective never drops.
fn compression_step(
    scheme: Scheme,
    ctxs: &[UserCtx],
    pinned: &[bool],
    decision: &mut Decision,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
    solver: &SolverConfig,
) -> Result<Vec<f64>> {
    let num_users = ctxs.len();
    let offloaders: Vec<usize> = (0..num_users)
        .filter(|&u| decision.offload[u] && !pinned[u])
        .collect();
    if offloaders.is_empty() {
        return Ok(Vec::new());
    }

    let instances: Vec<CompressionInstance> = offloaders
        .iter()
        .map(|&u| build_instance(&ctxs[u], catalog, cfg, decision.capacity[u]))
        .collect();

    let (candidates, trace): (Vec<RoundedDecision>, Vec<f64>) = if scheme == Scheme::Wcr {
        let picks = instances
            .iter()
            .map(|inst| {
                let local = local_branch(inst);
                let offload = eta_bounds_true(inst)
                    .filter(|&(lo, hi)| lo <= 1.0 && hi >= 1.0)
                    .and_then(|_| offload_branch(inst, 1.0));
                match (local, offload) {
                    (Some(l), Some(o)) => Ok(if o.objective > l.objective { o } else { l }),
                    (Some(l), None) => Ok(l),
                    (None, Some(o)) => Ok(o),
                    (None, None) => Err(Error::UserInfeasible),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        (picks, Vec::new())
    } else {
        let anchors: Vec<Anchor> = offloaders
            .iter()
            .map(|&u| Anchor {
                x: 1.0,
                eta: decision.eta(u),
            })
            .collect();
        let state = sca_iterate(&instances, &anchors, solver.inner_tol, solver.max_inner)?;
        let rounded = round_and_recover(&instances, &state.points)?;
        (rounded, state.trace)
    };

    for ((&u, inst), candidate) in offloaders.iter().zip(&instances).zip(candidates) {
        let mut best = candidate;
        // Incumbent point under the fresh capacity share. WCR incumbents
        // always sit at ratio 1 already.
        let prev_eta = decision.eta(u);
        if let Some((lo, hi)) = eta_bounds_true(inst) {
            if prev_eta >= lo - 1e-12 && prev_eta <= hi + 1e-12 {
                let incumbent = RoundedDecision {
                    offload: true,
                    ratio: decision.ratio[u],
                    eta: prev_eta,
                    objective: inst.true_objective(1.0, prev_eta),
                };
                if incumbent.objective > best.objective {
                    best = incumbent;
                }
            }
        }
        decision.offload[u] = best.offload;
        decision.ratio[u] = if best.offload { best.ratio } else { 1.0 };
        if !best.offload {
            decision.capacity[u] = 0.0;
        }
    }
    Ok(trace)
}
