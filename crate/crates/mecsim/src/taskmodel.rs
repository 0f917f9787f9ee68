//! Task catalog, the delay chain, the power-law accuracy model, the
//! logarithmic system utility and the constraint checker.
//!
//! Delays and accuracy are driven by an abstract data unit: a raw task of
//! `a` units costs `F(a) = slope * a + intercept` cycles to process and
//! `a * bits_per_unit` bits to transmit. Accuracy follows the fitted power
//! law `y(alpha) = p - q * alpha^(-r)` in percent, where `alpha` is the
//! volume actually processed. Compression divides the volume by the ratio
//! `eps >= 1` before transmission, trading accuracy for delay.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Relative tolerance for constraint satisfaction.
pub const CONSTRAINT_REL_TOL: f64 = 1e-9;

/// One task class: a delay limit in seconds and an accuracy limit in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskType {
    pub delay_limit: f64,
    pub accuracy_limit: f64,
}

/// Power-law accuracy fit `y = p - q * alpha^(-r)`, `y` in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl Default for FitParams {
    fn default() -> Self {
        Self {
            p: 100.0,
            q: 80.0,
            r: 0.6,
        }
    }
}

impl FitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0) || !(self.q > 0.0) {
            return Err(Error::InvalidValue {
                key: "fit_p/fit_q".into(),
                reason: "must be strictly positive".into(),
            });
        }
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(Error::InvalidValue {
                key: "fit_r".into(),
                reason: "must lie in (0, 1]".into(),
            });
        }
        Ok(())
    }
}

/// The set of task classes plus the shared accuracy fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskCatalog {
    pub types: Vec<TaskType>,
    pub fit: FitParams,
}

impl Default for TaskCatalog {
    fn default() -> Self {
        Self {
            types: vec![
                TaskType {
                    delay_limit: 0.020,
                    accuracy_limit: 85.0,
                },
                TaskType {
                    delay_limit: 0.040,
                    accuracy_limit: 90.0,
                },
                TaskType {
                    delay_limit: 0.060,
                    accuracy_limit: 95.0,
                },
            ],
            fit: FitParams::default(),
        }
    }
}

impl TaskCatalog {
    pub fn validate(&self) -> Result<()> {
        self.fit.validate()?;
        if self.types.is_empty() {
            return Err(Error::InvalidValue {
                key: "task".into(),
                reason: "catalog must contain at least one task type".into(),
            });
        }
        for t in &self.types {
            if !(t.delay_limit > 0.0) {
                return Err(Error::InvalidValue {
                    key: "task".into(),
                    reason: "delay limit must be strictly positive".into(),
                });
            }
            if !(t.accuracy_limit > 0.0 && t.accuracy_limit < self.fit.p) {
                return Err(Error::InvalidValue {
                    key: "task".into(),
                    reason: "accuracy limit must lie in (0, p)".into(),
                });
            }
        }
        Ok(())
    }
}

/// One user's request: a task class and a raw data volume in units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserTask {
    pub task_index: usize,
    pub raw_volume: f64,
}

/// Per-user task assignment for a whole scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSet {
    pub tasks: Vec<UserTask>,
}

impl TaskSet {
    /// Draw one task class and one volume per user; pure in `(cfg, seed)`.
    pub fn generate(cfg: &SystemConfig, catalog: &TaskCatalog) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ 0x9e37_79b9_7f4a_7c15);
        let (lo, hi) = cfg.volume_range;
        let tasks = (0..cfg.num_users)
            .map(|_| UserTask {
                task_index: rng.gen_range(0..catalog.types.len()),
                raw_volume: if hi > lo { rng.gen_range(lo..hi) } else { lo },
            })
            .collect();
        Self { tasks }
    }

    pub fn task_type<'a>(&self, u: usize, catalog: &'a TaskCatalog) -> &'a TaskType {
        &catalog.types[self.tasks[u].task_index]
    }
}

/// A full allocation decision: per-user offload flag, compression ratio,
/// and MEC capacity share (0 for local users).
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub offload: Vec<bool>,
    pub ratio: Vec<f64>,
    pub capacity: Vec<f64>,
}

impl Decision {
    pub fn all_local(num_users: usize) -> Self {
        Self {
            offload: vec![false; num_users],
            ratio: vec![1.0; num_users],
            capacity: vec![0.0; num_users],
        }
    }

    /// Effective processed fraction `eta = 1 - x + x / eps`.
    pub fn eta(&self, u: usize) -> f64 {
        if self.offload[u] {
            1.0 / self.ratio[u]
        } else {
            1.0
        }
    }
}

/// Cycles needed to process `volume` units: `slope * volume + intercept`.
pub fn overhead_cycles(volume: f64, cfg: &SystemConfig) -> f64 {
    cfg.overhead_slope * volume + cfg.overhead_intercept
}

/// Local computing delay for a raw volume, seconds.
pub fn local_delay(volume: f64, cfg: &SystemConfig) -> f64 {
    overhead_cycles(volume, cfg) / cfg.local_capacity
}

/// Volume after compression by `ratio >= 1`.
pub fn compressed_volume(volume: f64, ratio: f64) -> Result<f64> {
    if ratio < 1.0 {
        return Err(Error::Domain(format!(
            "compression ratio {ratio} violates ratio >= 1"
        )));
    }
    Ok(volume / ratio)
}

/// Uplink transmission delay of a compressed volume, seconds.
pub fn comm_delay(compressed: f64, rate: f64, cfg: &SystemConfig) -> f64 {
    compressed * cfg.bits_per_unit / rate
}

/// MEC computing delay of a compressed volume at an allocated capacity.
pub fn offload_comp_delay(compressed: f64, capacity: f64, cfg: &SystemConfig) -> Result<f64> {
    if !(capacity > 0.0) {
        return Err(Error::Domain(format!(
            "offloaded work needs positive capacity, got {capacity}"
        )));
    }
    Ok(overhead_cycles(compressed, cfg) / capacity)
}

/// Computing accuracy in percent for a processed volume.
pub fn accuracy(effective_volume: f64, fit: &FitParams) -> Result<f64> {
    if !(effective_volume > 0.0) {
        return Err(Error::Domain(format!(
            "accuracy undefined for volume {effective_volume}"
        )));
    }
    Ok(fit.p - fit.q * effective_volume.powf(-fit.r))
}

/// Smallest processed volume that reaches `limit` percent accuracy.
pub fn volume_for_accuracy(limit: f64, fit: &FitParams) -> Result<f64> {
    if !(limit < fit.p) {
        return Err(Error::Domain(format!(
            "accuracy limit {limit} is unreachable (p = {})",
            fit.p
        )));
    }
    Ok((fit.q / (fit.p - limit)).powf(1.0 / fit.r))
}

/// Volume a user actually processes under a decision.
pub fn effective_volume(volume: f64, offload: bool, ratio: f64) -> f64 {
    if offload {
        volume / ratio
    } else {
        volume
    }
}

/// Total task delay of user `u`: local delay when computing locally,
/// transmission plus MEC computing delay when offloading.
pub fn user_total_delay(
    u: usize,
    tasks: &TaskSet,
    decision: &Decision,
    scenario: &Scenario,
    cfg: &SystemConfig,
) -> Result<f64> {
    let a = tasks.tasks[u].raw_volume;
    if decision.offload[u] {
        let b = compressed_volume(a, decision.ratio[u])?;
        let t_comm = comm_delay(b, scenario.rate[u], cfg);
        let t_comp = offload_comp_delay(b, decision.capacity[u], cfg)?;
        Ok(t_comm + t_comp)
    } else {
        Ok(local_delay(a, cfg))
    }
}

/// Accuracy of user `u` under a decision.
pub fn user_accuracy(
    u: usize,
    tasks: &TaskSet,
    decision: &Decision,
    fit: &FitParams,
) -> Result<f64> {
    let a = tasks.tasks[u].raw_volume;
    accuracy(effective_volume(a, decision.offload[u], decision.ratio[u]), fit)
}

/// System utility: sum over users of `ln(L * y / t)`, `y` in percent and
/// `t` in seconds.
pub fn system_utility(
    tasks: &TaskSet,
    decision: &Decision,
    scenario: &Scenario,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
) -> Result<f64> {
    let mut total = 0.0;
    for u in 0..tasks.tasks.len() {
        let y = user_accuracy(u, tasks, decision, &catalog.fit)?;
        let t = user_total_delay(u, tasks, decision, scenario, cfg)?;
        if !(y > 0.0) || !(t > 0.0) {
            return Err(Error::Domain(format!(
                "user {u}: utility undefined for accuracy {y} and delay {t}"
            )));
        }
        total += (cfg.utility_weight * y / t).ln();
    }
    Ok(total)
}

/// Per-user constraint outcomes. Residuals are relative; positive means
/// violated.
#[derive(Debug, Clone, PartialEq)]
pub struct UserConstraintCheck {
    /// Offload indicator is binary (holds by construction).
    pub offload_binary: bool,
    /// At most one offload target (holds by single association).
    pub single_target: bool,
    /// Compression ratio at least 1.
    pub ratio_ok: bool,
    /// Offloaders hold strictly positive capacity.
    pub capacity_ok: bool,
    /// `(t - t_limit) / t_limit`.
    pub delay_residual: f64,
    /// `(y_limit - y) / y_limit`.
    pub accuracy_residual: f64,
    pub feasible: bool,
}

/// Full constraint report for a decision.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub user_checks: Vec<UserConstraintCheck>,
    /// Per-SBS `(sum f - F_k) / F_k`.
    pub sbs_capacity_residual: Vec<f64>,
    pub feasible: bool,
}

/// Evaluate every constraint of the allocation problem; reports residuals,
/// never fails.
pub fn check_constraints(
    tasks: &TaskSet,
    decision: &Decision,
    scenario: &Scenario,
    catalog: &TaskCatalog,
    cfg: &SystemConfig,
) -> ConstraintReport {
    let num_users = tasks.tasks.len();
    let mut user_checks = Vec::with_capacity(num_users);
    let mut sbs_load = vec![0.0; cfg.num_sbs];
    let mut feasible = true;

    for u in 0..num_users {
        let task = tasks.task_type(u, catalog);
        let ratio_ok = decision.ratio[u] >= 1.0 - CONSTRAINT_REL_TOL;
        let capacity_ok = !decision.offload[u] || decision.capacity[u] > 0.0;
        let delay_residual = match user_total_delay(u, tasks, decision, scenario, cfg) {
            Ok(t) => (t - task.delay_limit) / task.delay_limit,
            Err(_) => f64::INFINITY,
        };
        let accuracy_residual = match user_accuracy(u, tasks, decision, &catalog.fit) {
            Ok(y) => (task.accuracy_limit - y) / task.accuracy_limit,
            Err(_) => f64::INFINITY,
        };
        let user_ok = ratio_ok
            && capacity_ok
            && delay_residual <= CONSTRAINT_REL_TOL
            && accuracy_residual <= CONSTRAINT_REL_TOL;
        feasible &= user_ok;
        user_checks.push(UserConstraintCheck {
            offload_binary: true,
            single_target: true,
            ratio_ok,
            capacity_ok,
            delay_residual,
            accuracy_residual,
            feasible: user_ok,
        });
        if decision.offload[u] {
            sbs_load[scenario.association[u]] += decision.capacity[u];
        }
    }

    let sbs_capacity_residual: Vec<f64> = sbs_load
        .iter()
        .map(|&load| (load - cfg.mec_capacity) / cfg.mec_capacity)
        .collect();
    for &res in &sbs_capacity_residual {
        feasible &= res <= CONSTRAINT_REL_TOL;
    }

    ConstraintReport {
        user_checks,
        sbs_capacity_residual,
        feasible,
    }
}
