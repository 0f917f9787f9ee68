//! Per-SBS MEC capacity allocation.
//!
//! Given fixed offload flags and compression ratios, the per-SBS subproblem
//! maximizes `sum ln(acc) - ln(fixed_delay + work / f)` over the capacity
//! shares `f` of the offloading users, subject to each user's deadline and
//! the server budget. The objective is strictly increasing and concave in
//! every share, so the budget binds and the KKT stationarity condition
//!
//! `work / (fixed_delay * f^2 + work * f) = lambda`
//!
//! identifies the optimum. For a given multiplier the share is the positive
//! root of `lambda * fixed_delay * f^2 + lambda * work * f - work = 0`,
//! clipped below at the deadline minimum; an outer bisection on `lambda`
//! drives the total onto the budget.

use crate::error::{Error, Result};
use crate::numeric::{bisect_root, BracketedScalarProblem};

/// One user's constants for the capacity subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityUser {
    /// Constant accuracy factor entering the objective as `ln(acc)`.
    pub accuracy_const: f64,
    /// Delay part that capacity cannot change: local delay for local users,
    /// transmission delay for offloaders. Seconds.
    pub fixed_delay: f64,
    /// Cycles of offloaded work (compressed volume overhead); unused for
    /// local users.
    pub work: f64,
    /// Deadline, seconds.
    pub delay_limit: f64,
    pub offload: bool,
}

/// A per-SBS allocation instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityInstance {
    pub users: Vec<CapacityUser>,
    /// Server budget, cycles/s.
    pub budget: f64,
}

/// Deadline-minimum capacity per user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinCapacity {
    /// Local user; holds no capacity.
    Local,
    /// Offloader able to meet its deadline at or above this share.
    Feasible(f64),
    /// Offloader that cannot meet its deadline at any capacity.
    Infeasible,
}

/// Smallest capacity meeting each offloader's deadline:
/// `f_min = work / (delay_limit - fixed_delay)`.
pub fn min_capacities(instance: &CapacityInstance) -> Vec<MinCapacity> {
    instance
        .users
        .iter()
        .map(|u| {
            if !u.offload {
                MinCapacity::Local
            } else if u.delay_limit > u.fixed_delay {
                MinCapacity::Feasible(u.work / (u.delay_limit - u.fixed_delay))
            } else {
                MinCapacity::Infeasible
            }
        })
        .collect()
}

/// Subproblem objective at an allocation (local users contribute their
/// constant terms).
pub fn objective(instance: &CapacityInstance, shares: &[f64]) -> f64 {
    instance
        .users
        .iter()
        .zip(shares)
        .map(|(u, &f)| {
            let delay = if u.offload {
                u.fixed_delay + u.work / f
            } else {
                u.fixed_delay
            };
            u.accuracy_const.ln() - delay.ln()
        })
        .sum()
}

/// Share demanded by one user at multiplier `lambda`, before clipping.
fn share_at(lambda: f64, fixed_delay: f64, work: f64) -> f64 {
    // Positive root of lambda*A*f^2 + lambda*C*f - C = 0 in the
    // cancellation-free form f = 2 / (lambda * (1 + sqrt(1 + 4A/(lambda C)))).
    let z = 4.0 * fixed_delay / (lambda * work);
    2.0 / (lambda * (1.0 + (1.0 + z).sqrt()))
}

/// Multiplier at which one user's stationarity holds with share `f`.
fn lambda_at(f: f64, fixed_delay: f64, work: f64) -> f64 {
    work / (fixed_delay * f * f + work * f)
}

/// KKT allocation of the budget across offloaders. Preconditions: every
/// offloader deadline-feasible (see [`min_capacities`]) and the minimum
/// demands fit the budget.
pub fn solve_capacity(instance: &CapacityInstance) -> Result<Vec<f64>> {
    let budget = instance.budget;
    if !(budget > 0.0) {
        return Err(Error::Domain(format!("budget must be positive, got {budget}")));
    }
    let mins = min_capacities(instance);
    let mut offloaders: Vec<(usize, f64, f64, f64)> = Vec::new();
    for (i, (u, m)) in instance.users.iter().zip(&mins).enumerate() {
        match m {
            MinCapacity::Local => {}
            MinCapacity::Infeasible => {
                return Err(Error::Domain(format!(
                    "user {i} cannot meet its deadline at any capacity"
                )));
            }
            MinCapacity::Feasible(f_min) => {
                if !(u.work > 0.0) {
                    return Err(Error::Domain(format!(
                        "offloader {i} has non-positive work"
                    )));
                }
                offloaders.push((i, u.fixed_delay, u.work, *f_min));
            }
        }
    }

    let mut shares = vec![0.0; instance.users.len()];
    if offloaders.is_empty() {
        return Ok(shares);
    }

    let total_min: f64 = offloaders.iter().map(|o| o.3).sum();
    if total_min > budget * (1.0 + 1e-12) {
        return Err(Error::BudgetInfeasible {
            required: total_min,
            budget,
        });
    }
    if total_min >= budget * (1.0 - 1e-12) {
        // The deadline minimums consume the whole budget.
        for &(i, _, _, f_min) in &offloaders {
            shares[i] = f_min;
        }
        return Ok(shares);
    }
    if offloaders.len() == 1 {
        // Single offloader: the increasing objective hands it the budget.
        shares[offloaders[0].0] = budget;
        return Ok(shares);
    }

    let demand = |lambda: f64| -> f64 {
        offloaders
            .iter()
            .map(|&(_, a, c, f_min)| share_at(lambda, a, c).max(f_min))
            .sum()
    };

    // Bracket the multiplier between the values where single users demand
    // the full budget and (nearly) their minimum, then expand if needed.
    let mut lambda_lo = offloaders
        .iter()
        .map(|&(_, a, c, _)| lambda_at(budget, a, c))
        .fold(f64::INFINITY, f64::min);
    let mut lambda_hi = offloaders
        .iter()
        .map(|&(_, a, c, f_min)| lambda_at(f_min.max(budget * 1e-9), a, c))
        .fold(0.0, f64::max);
    for _ in 0..64 {
        if demand(lambda_lo) >= budget {
            break;
        }
        lambda_lo /= 8.0;
    }
    for _ in 0..64 {
        if demand(lambda_hi) <= budget {
            break;
        }
        lambda_hi *= 8.0;
    }

    // Bisect on ln(lambda) so the tolerance is relative in the multiplier.
    let problem = BracketedScalarProblem::new(
        |u: f64| demand(u.exp()) - budget,
        lambda_lo.ln(),
        lambda_hi.ln(),
    )
    .with_tol(1e-12);
    let u_star = bisect_root(&problem)?;
    let lambda = u_star.exp();
    for &(i, a, c, f_min) in &offloaders {
        shares[i] = share_at(lambda, a, c).max(f_min);
    }
    Ok(shares)
}
