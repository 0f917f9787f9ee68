//! Per-user compression-offloading subproblem.
//!
//! With capacity shares fixed, the joint offload/compression problem
//! separates per user. After the substitution `eta = 1 - x + x / eps`, the
//! per-user objective is
//!
//! `ln(L * (p - q (a eta)^(-r))) - ln((1-x)(Bd - Bb) + Bb * eta)`
//!
//! with `Bd` the local delay and `Bb` the combined transmit-plus-compute
//! delay per unit of `eta`. The relaxed problem (`x` in `[0, 1]`) is made
//! concave by replacing the log-denominator with its first-order Taylor
//! expansion at an anchor; because the log of an affine form is concave,
//! the linearization over-estimates it, so the surrogate minorizes the true
//! objective and repeated re-anchoring climbs it monotonically. Rounding
//! compares the two integral branches and recovers `eps = 1 / eta`.
//!
//! `offload_fixed_delay` carries the part of the offload delay that does
//! not scale with `eta` (the overhead intercept divided by the capacity
//! share). The substituted model spreads that term proportionally to `eta`;
//! branch feasibility and branch objectives here use the exact form so that
//! recovered decisions always satisfy the delay limit of the full model.
//! Synthetic instances with `offload_fixed_delay = 0` make the two forms
//! identical.

use crate::error::{Error, Result};
use crate::numeric::{maximize_concave_1d, DEFAULT_GOLDEN_TOL};
use crate::taskmodel::{volume_for_accuracy, FitParams};

/// Constants of one user's subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionInstance {
    /// Local computing delay `Bd`, seconds.
    pub local_delay: f64,
    /// Offload delay per unit of `eta` in the substituted model,
    /// `Bb = transmit(a) + overhead(a) / f`, seconds.
    pub offload_unit_delay: f64,
    /// Part of the offload delay that does not scale with `eta`
    /// (overhead intercept over capacity share), seconds.
    pub offload_fixed_delay: f64,
    /// Raw data volume, units.
    pub raw_volume: f64,
    pub fit: FitParams,
    /// Deadline, seconds.
    pub delay_limit: f64,
    /// Accuracy limit, percent.
    pub accuracy_limit: f64,
    /// Utility weight.
    pub weight: f64,
}

impl CompressionInstance {
    pub fn validate(&self) -> Result<()> {
        if !(self.local_delay > 0.0) || !(self.offload_unit_delay > 0.0) {
            return Err(Error::Domain("delay constants must be positive".into()));
        }
        if !(self.offload_fixed_delay >= 0.0)
            || self.offload_fixed_delay >= self.offload_unit_delay
        {
            return Err(Error::Domain(
                "fixed offload delay must lie in [0, offload_unit_delay)".into(),
            ));
        }
        if !(self.raw_volume > 0.0) {
            return Err(Error::Domain("raw volume must be positive".into()));
        }
        self.fit.validate()?;
        if !(self.delay_limit > 0.0) || !(self.weight > 0.0) {
            return Err(Error::Domain("limits and weight must be positive".into()));
        }
        Ok(())
    }

    /// Smallest `eta` meeting the accuracy limit.
    pub fn eta_floor(&self) -> Result<f64> {
        Ok(volume_for_accuracy(self.accuracy_limit, &self.fit)? / self.raw_volume)
    }

    /// Accuracy in percent at a processed fraction.
    pub fn accuracy_at(&self, eta: f64) -> f64 {
        self.fit.p - self.fit.q * (self.raw_volume * eta).powf(-self.fit.r)
    }

    /// Delay of the substituted model at a (possibly fractional) point.
    pub fn model_delay(&self, x: f64, eta: f64) -> f64 {
        (1.0 - x) * (self.local_delay - self.offload_unit_delay) + self.offload_unit_delay * eta
    }

    /// Exact delay with the fixed offload part kept out of the `eta` scaling.
    pub fn true_delay(&self, x: f64, eta: f64) -> f64 {
        let variable = self.offload_unit_delay - self.offload_fixed_delay;
        (1.0 - x) * self.local_delay
            + (eta - 1.0 + x) * variable
            + x * self.offload_fixed_delay
    }

    /// Substituted-model objective `ln(L y) - ln(model_delay)`.
    pub fn model_objective(&self, x: f64, eta: f64) -> f64 {
        (self.weight * self.accuracy_at(eta)).ln() - self.model_delay(x, eta).ln()
    }

    /// Exact-model objective `ln(L y) - ln(true_delay)`.
    pub fn true_objective(&self, x: f64, eta: f64) -> f64 {
        (self.weight * self.accuracy_at(eta)).ln() - self.true_delay(x, eta).ln()
    }

    /// Upper `eta` bound from the deadline at full offload, exact model.
    pub fn eta_cap_true(&self) -> f64 {
        let variable = self.offload_unit_delay - self.offload_fixed_delay;
        ((self.delay_limit - self.offload_fixed_delay) / variable).min(1.0)
    }

    /// Whether computing locally satisfies both limits.
    pub fn local_feasible(&self) -> bool {
        self.local_delay <= self.delay_limit && self.accuracy_at(1.0) >= self.accuracy_limit
    }
}

/// Feasible `eta` interval for full offload in the substituted model:
/// `[accuracy floor, min(1, delay_limit / Bb)]`. `None` when the user
/// cannot offload feasibly.
pub fn eta_bounds(instance: &CompressionInstance) -> Option<(f64, f64)> {
    let floor = instance.eta_floor().ok()?;
    let cap = (instance.delay_limit / instance.offload_unit_delay).min(1.0);
    (floor <= cap).then_some((floor, cap))
}

/// Feasible `eta` interval for full offload in the exact model.
pub fn eta_bounds_true(instance: &CompressionInstance) -> Option<(f64, f64)> {
    let floor = instance.eta_floor().ok()?;
    let cap = instance.eta_cap_true();
    (floor <= cap && cap > 0.0).then_some((floor, cap))
}

/// An SCA anchor point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub x: f64,
    pub eta: f64,
}

/// Affine minorant-defining cut: the surrogate bound is
/// `v >= base + dx (x - anchor.x) + deta (eta - anchor.eta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateCut {
    pub base: f64,
    pub dx: f64,
    pub deta: f64,
    pub anchor: Anchor,
}

impl SurrogateCut {
    /// Lower bound on the surrogate variable `v` at a point.
    pub fn bound(&self, x: f64, eta: f64) -> f64 {
        self.base + self.dx * (x - self.anchor.x) + self.deta * (eta - self.anchor.eta)
    }
}

/// First-order Taylor expansion of the log-denominator at the anchor.
pub fn sca_linearize(anchor: Anchor, instance: &CompressionInstance) -> Result<SurrogateCut> {
    let d = instance.model_delay(anchor.x, anchor.eta);
    if !(d > 0.0) {
        return Err(Error::Domain(format!(
            "anchor ({}, {}) leaves the positive-delay region",
            anchor.x, anchor.eta
        )));
    }
    Ok(SurrogateCut {
        base: d.ln(),
        dx: (instance.offload_unit_delay - instance.local_delay) / d,
        deta: instance.offload_unit_delay / d,
        anchor,
    })
}

/// A relaxed per-user solution (`x` fractional).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxedPoint {
    pub x: f64,
    pub eta: f64,
    /// Surrogate bound value at the point.
    pub v: f64,
}

/// `eta` interval at a given `x`: processed fraction at least `1 - x` and
/// the accuracy floor, at most 1 and the deadline bound.
fn eta_interval_at(instance: &CompressionInstance, floor: f64, x: f64) -> Option<(f64, f64)> {
    let lo = floor.max(1.0 - x);
    let delta = instance.local_delay - instance.offload_unit_delay;
    let hi = ((instance.delay_limit - (1.0 - x) * delta) / instance.offload_unit_delay).min(1.0);
    (lo <= hi).then_some((lo, hi))
}

/// `x` interval on which the relaxed feasible set is nonempty. All bounds
/// are affine consequences of the constraint system.
fn feasible_x_interval(instance: &CompressionInstance, floor: f64) -> Option<(f64, f64)> {
    if floor > 1.0 {
        return None;
    }
    let mut x_lo: f64 = 0.0;
    let mut x_hi: f64 = 1.0;
    // Lower eta bound against the deadline: (1 - x) Bd <= t_limit.
    x_lo = x_lo.max(1.0 - instance.delay_limit / instance.local_delay);
    // Accuracy floor against the deadline bound.
    let rhs = instance.delay_limit - floor * instance.offload_unit_delay;
    let delta = instance.local_delay - instance.offload_unit_delay;
    if delta > 0.0 {
        x_lo = x_lo.max(1.0 - rhs / delta);
    } else if delta < 0.0 {
        x_hi = x_hi.min(1.0 - rhs / delta);
    } else if rhs < 0.0 {
        return None;
    }
    (x_lo <= x_hi).then_some((x_lo, x_hi))
}

/// Solve the per-user concave surrogates: maximize
/// `ln(L y(a eta)) - v` with `v` at its cut lower bound, by nested
/// one-dimensional concave maximization (outer over `x`, inner over `eta`).
/// Users with an empty relaxed set fall back to the local point when it is
/// feasible and to `None` otherwise.
pub fn solve_inner_convex(
    instances: &[CompressionInstance],
    cuts: &[SurrogateCut],
) -> Vec<Option<RelaxedPoint>> {
    instances
        .iter()
        .zip(cuts)
        .map(|(instance, cut)| solve_inner_user(instance, cut))
        .collect()
}

fn solve_inner_user(
    instance: &CompressionInstance,
    cut: &SurrogateCut,
) -> Option<RelaxedPoint> {
    let floor = match instance.eta_floor() {
        Ok(f) => f,
        Err(_) => {
            // Accuracy limit unreachable even uncompressed.
            return None;
        }
    };
    let surrogate = |x: f64, eta: f64| {
        (instance.weight * instance.accuracy_at(eta)).ln() - cut.bound(x, eta)
    };
    let Some((x_lo, x_hi)) = feasible_x_interval(instance, floor) else {
        return instance.local_feasible().then(|| RelaxedPoint {
            x: 0.0,
            eta: 1.0,
            v: cut.bound(0.0, 1.0),
        });
    };

    let best_eta_at = |x: f64| -> Option<(f64, f64)> {
        let (lo, hi) = eta_interval_at(instance, floor, x)?;
        maximize_concave_1d(|eta| surrogate(x, eta), lo, hi, DEFAULT_GOLDEN_TOL).ok()
    };
    let value_at = |x: f64| best_eta_at(x).map_or(f64::NEG_INFINITY, |(_, v)| v);

    let (x_star, _) =
        maximize_concave_1d(value_at, x_lo, x_hi, DEFAULT_GOLDEN_TOL).ok()?;
    let (eta_star, value) = best_eta_at(x_star)?;

    // Keep the anchor when it is feasible and the search did not improve on
    // it; this pins the minorize-maximize ladder against search tolerance.
    let anchor = cut.anchor;
    if anchor.x >= x_lo - 1e-12 && anchor.x <= x_hi + 1e-12 {
        if let Some((lo, hi)) = eta_interval_at(instance, floor, anchor.x) {
            if anchor.eta >= lo - 1e-12
                && anchor.eta <= hi + 1e-12
                && surrogate(anchor.x, anchor.eta) >= value
            {
                return Some(RelaxedPoint {
                    x: anchor.x,
                    eta: anchor.eta,
                    v: cut.bound(anchor.x, anchor.eta),
                });
            }
        }
    }
    Some(RelaxedPoint {
        x: x_star,
        eta: eta_star,
        v: cut.bound(x_star, eta_star),
    })
}

/// State of one SCA run: final anchors, relaxed points and the trace of
/// substituted-model objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaState {
    pub anchors: Vec<Anchor>,
    pub points: Vec<Option<RelaxedPoint>>,
    pub trace: Vec<f64>,
}

fn trace_value(instances: &[CompressionInstance], anchors: &[Anchor]) -> f64 {
    instances
        .iter()
        .zip(anchors)
        .map(|(inst, a)| inst.model_objective(a.x, a.eta))
        .sum()
}

/// Iterate linearize-and-solve, re-anchoring at each solution, until the
/// substituted-model objective moves by at most `tol` or `max_iter` rounds
/// pass. `max_iter = 0` returns the evaluation of the initial anchors.
pub fn sca_iterate(
    instances: &[CompressionInstance],
    init: &[Anchor],
    tol: f64,
    max_iter: usize,
) -> Result<ScaState> {
    let mut anchors = init.to_vec();
    let mut points: Vec<Option<RelaxedPoint>> = init
        .iter()
        .zip(instances)
        .map(|(a, inst)| {
            Some(RelaxedPoint {
                x: a.x,
                eta: a.eta,
                v: inst.model_delay(a.x, a.eta).ln(),
            })
        })
        .collect();
    let mut trace = vec![trace_value(instances, &anchors)];

    for _ in 0..max_iter {
        let cuts: Vec<SurrogateCut> = anchors
            .iter()
            .zip(instances)
            .map(|(a, inst)| sca_linearize(*a, inst))
            .collect::<Result<_>>()?;
        let solved = solve_inner_convex(instances, &cuts);
        let mut infeasible = Vec::new();
        for (u, p) in solved.iter().enumerate() {
            if p.is_none() {
                infeasible.push(u);
            }
        }
        if !infeasible.is_empty() {
            return Err(Error::InfeasibleUsers(infeasible));
        }
        points = solved;
        anchors = points
            .iter()
            .map(|p| {
                let p = p.as_ref().unwrap();
                Anchor { x: p.x, eta: p.eta }
            })
            .collect();
        let value = trace_value(instances, &anchors);
        let done = (value - trace[trace.len() - 1]).abs() <= tol;
        trace.push(value);
        if done {
            break;
        }
    }
    Ok(ScaState {
        anchors,
        points,
        trace,
    })
}

/// A recovered integral decision for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundedDecision {
    pub offload: bool,
    /// Compression ratio; 1 for local users.
    pub ratio: f64,
    pub eta: f64,
    /// Exact-model objective at the decision.
    pub objective: f64,
}

/// The local branch, when feasible.
pub fn local_branch(instance: &CompressionInstance) -> Option<RoundedDecision> {
    instance.local_feasible().then(|| RoundedDecision {
        offload: false,
        ratio: 1.0,
        eta: 1.0,
        objective: instance.true_objective(0.0, 1.0),
    })
}

/// The full-offload branch at `eta` clamped into the exact feasible
/// interval, when that interval is nonempty.
pub fn offload_branch(instance: &CompressionInstance, eta: f64) -> Option<RoundedDecision> {
    let (lo, hi) = eta_bounds_true(instance)?;
    let eta = eta.clamp(lo, hi);
    Some(RoundedDecision {
        offload: true,
        ratio: 1.0 / eta,
        eta,
        objective: instance.true_objective(1.0, eta),
    })
}

/// Round one relaxed solution: evaluate both integral branches, discard
/// infeasible ones, keep the better.
pub fn round_user(instance: &CompressionInstance, relaxed_eta: f64) -> Result<RoundedDecision> {
    let local = local_branch(instance);
    let offload = offload_branch(instance, relaxed_eta);
    match (local, offload) {
        (Some(l), Some(o)) => Ok(if o.objective > l.objective { o } else { l }),
        (Some(l), None) => Ok(l),
        (None, Some(o)) => Ok(o),
        (None, None) => Err(Error::UserInfeasible),
    }
}

/// Round a whole relaxed solution; collects users infeasible in both
/// branches into one error.
pub fn round_and_recover(
    instances: &[CompressionInstance],
    points: &[Option<RelaxedPoint>],
) -> Result<Vec<RoundedDecision>> {
    let mut out = Vec::with_capacity(instances.len());
    let mut infeasible = Vec::new();
    for (u, (instance, point)) in instances.iter().zip(points).enumerate() {
        let eta = point.map_or(1.0, |p| p.eta);
        match round_user(instance, eta) {
            Ok(r) => out.push(r),
            Err(_) => infeasible.push(u),
        }
    }
    if infeasible.is_empty() {
        Ok(out)
    } else {
        Err(Error::InfeasibleUsers(infeasible))
    }
}

/// Exact per-user optimum by branch enumeration: the local point against a
/// one-dimensional concave maximization of the full-offload objective over
/// `ln(eta)`. Verification oracle for the SCA-plus-rounding path.
pub fn exact_user_oracle(instance: &CompressionInstance) -> Result<RoundedDecision> {
    let local = local_branch(instance);
    let offload = eta_bounds_true(instance).and_then(|(lo, hi)| {
        let g = |u: f64| instance.true_objective(1.0, u.exp());
        let (u_star, objective) =
            maximize_concave_1d(g, lo.ln(), hi.ln(), DEFAULT_GOLDEN_TOL).ok()?;
        let eta = u_star.exp().clamp(lo, hi);
        Some(RoundedDecision {
            offload: true,
            ratio: 1.0 / eta,
            eta,
            objective,
        })
    });
    match (local, offload) {
        (Some(l), Some(o)) => Ok(if o.objective > l.objective { o } else { l }),
        (Some(l), None) => Ok(l),
        (None, Some(o)) => Ok(o),
        (None, None) => Err(Error::UserInfeasible),
    }
}

/// Initial anchor wherever offloading is feasible: full offload at the
/// midpoint of the feasible `eta` interval, otherwise the local point.
pub fn init_anchor(instance: &CompressionInstance) -> Option<Anchor> {
    if let Some((lo, hi)) = eta_bounds_true(instance) {
        Some(Anchor {
            x: 1.0,
            eta: 0.5 * (lo + hi),
        })
    } else if instance.local_feasible() {
        Some(Anchor { x: 0.0, eta: 1.0 })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn instance(local: f64, unit: f64, t_limit: f64, acc_limit: f64) -> CompressionInstance {
        CompressionInstance {
            local_delay: local,
            offload_unit_delay: unit,
            offload_fixed_delay: 0.0,
            raw_volume: 1000.0,
            fit: FitParams::default(),
            delay_limit: t_limit,
            accuracy_limit: acc_limit,
            weight: 1.0,
        }
    }

    fn random_instance(rng: &mut ChaCha8Rng) -> CompressionInstance {
        let acc = [85.0, 90.0, 95.0][rng.gen_range(0..3)];
        let t_limit = [0.02, 0.04, 0.06][rng.gen_range(0..3)];
        CompressionInstance {
            local_delay: rng.gen_range(0.005..0.08),
            offload_unit_delay: rng.gen_range(0.001..0.4),
            offload_fixed_delay: 0.0,
            raw_volume: rng.gen_range(200.0..1000.0),
            fit: FitParams::default(),
            delay_limit: t_limit,
            accuracy_limit: acc,
            weight: 1.0,
        }
    }

    fn feasible_random_instance(rng: &mut ChaCha8Rng) -> CompressionInstance {
        loop {
            let inst = random_instance(rng);
            if inst.local_feasible() || eta_bounds_true(&inst).is_some() {
                return inst;
            }
        }
    }

    #[test]
    fn eta_bounds_accuracy_floor() {
        let inst = instance(0.02, 0.5, 0.06, 85.0);
        let (lo, _) = eta_bounds(&inst).unwrap();
        assert!((lo - 0.016277).abs() <= 1e-5, "floor = {lo}");
    }

    #[test]
    fn unreachable_accuracy_blocks_offload() {
        let mut inst = instance(0.02, 0.5, 0.06, 85.0);
        inst.accuracy_limit = 100.0;
        assert!(eta_bounds(&inst).is_none());
    }

    #[test]
    fn loose_deadline_interval_contains_one() {
        let inst = instance(0.02, 0.05, 0.06, 85.0);
        let (lo, hi) = eta_bounds(&inst).unwrap();
        assert!(lo <= 1.0 && hi == 1.0, "[{lo}, {hi}]");
    }

    #[test]
    fn linearization_is_exact_at_the_anchor() {
        let inst = instance(0.03, 0.2, 0.06, 85.0);
        let anchor = Anchor { x: 0.7, eta: 0.4 };
        let cut = sca_linearize(anchor, &inst).unwrap();
        let d = inst.model_delay(anchor.x, anchor.eta);
        assert!((cut.bound(anchor.x, anchor.eta) - d.ln()).abs() <= 1e-14);
    }

    #[test]
    fn equal_delay_constants_zero_the_x_coefficient() {
        let inst = instance(0.05, 0.05, 0.06, 85.0);
        let cut = sca_linearize(Anchor { x: 0.5, eta: 0.5 }, &inst).unwrap();
        assert_eq!(cut.dx, 0.0);
    }

    #[test]
    fn linearization_over_estimates_the_log_denominator() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let inst = instance(0.03, 0.2, 0.06, 85.0);
        let cut = sca_linearize(Anchor { x: 0.8, eta: 0.5 }, &inst).unwrap();
        for _ in 0..10_000 {
            let x = rng.gen_range(0.0..1.0);
            let eta = rng.gen_range(0.01..1.0);
            let d = inst.model_delay(x, eta);
            if d > 0.0 {
                assert!(
                    cut.bound(x, eta) >= d.ln() - 1e-12,
                    "under-estimate at ({x}, {eta})"
                );
            }
        }
    }

    #[test]
    fn dominated_offload_rounds_to_local() {
        // Local delay far below the offload unit delay, accuracy already
        // met. The relaxed point may sit on the fractional partial-offload
        // diagonal (eta near 1 - x keeps the substituted-model delay tiny),
        // so the integral branch comparison is what lands on local.
        let inst = instance(0.004, 0.5, 0.06, 85.0);
        let anchor = Anchor { x: 0.5, eta: 0.5 };
        let state = sca_iterate(std::slice::from_ref(&inst), &[anchor], 1e-4, 20).unwrap();
        let r = round_user(&inst, state.points[0].unwrap().eta).unwrap();
        assert!(!r.offload);
        assert_eq!(r.ratio, 1.0);
        // And the local point dominates the best offload point outright.
        let oracle = exact_user_oracle(&inst).unwrap();
        assert!(!oracle.offload);
    }

    #[test]
    fn inner_solve_prefers_offload_when_local_slow() {
        let inst = instance(0.05, 0.004, 0.06, 85.0);
        let cut = sca_linearize(Anchor { x: 0.5, eta: 0.5 }, &inst).unwrap();
        let p = solve_inner_user(&inst, &cut).unwrap();
        assert!(p.x >= 0.98, "x = {}", p.x);
    }

    #[test]
    fn inner_solve_never_drops_below_the_anchor() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let inst = feasible_random_instance(&mut rng);
            let Some(anchor) = init_anchor(&inst) else {
                continue;
            };
            let cut = sca_linearize(anchor, &inst).unwrap();
            let Some(p) = solve_inner_user(&inst, &cut) else {
                continue;
            };
            let before = inst.model_objective(anchor.x, anchor.eta);
            let after = inst.model_objective(p.x, p.eta);
            assert!(
                after >= before - 1e-9,
                "objective dropped from {before} to {after}"
            );
        }
    }

    #[test]
    fn sca_trace_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..100 {
            let inst = feasible_random_instance(&mut rng);
            let Some(anchor) = init_anchor(&inst) else {
                continue;
            };
            let state = sca_iterate(std::slice::from_ref(&inst), &[anchor], 1e-4, 20).unwrap();
            for w in state.trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "trace dipped: {:?}", state.trace);
            }
        }
    }

    #[test]
    fn converged_state_stops_in_one_extra_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let inst = feasible_random_instance(&mut rng);
        let anchor = init_anchor(&inst).unwrap();
        let state = sca_iterate(std::slice::from_ref(&inst), &[anchor], 1e-4, 20).unwrap();
        let rerun = sca_iterate(&[inst], &state.anchors, 1e-4, 20).unwrap();
        assert_eq!(rerun.trace.len(), 2, "trace = {:?}", rerun.trace);
        assert!((rerun.trace[1] - rerun.trace[0]).abs() <= 1e-4);
    }

    #[test]
    fn zero_iterations_return_the_init_evaluation() {
        let inst = instance(0.03, 0.2, 0.06, 85.0);
        let anchor = init_anchor(&inst).unwrap();
        let state = sca_iterate(std::slice::from_ref(&inst), &[anchor], 1e-4, 0).unwrap();
        assert_eq!(state.trace.len(), 1);
        assert_eq!(state.anchors[0], anchor);
        assert!(
            (state.trace[0] - inst.model_objective(anchor.x, anchor.eta)).abs() <= 1e-14
        );
    }

    #[test]
    fn rounding_recovers_the_compression_ratio() {
        // Relaxed (x = 0.97, eta = 0.02), offload feasible there and better
        // than the sluggish local branch: rounds to x = 1, eps = 50.
        let inst = instance(0.019, 0.5, 0.02, 85.0);
        let r = round_user(&inst, 0.02).unwrap();
        assert!(r.offload);
        assert!((r.ratio - 50.0).abs() <= 1e-9, "ratio = {}", r.ratio);
    }

    #[test]
    fn integral_local_relaxation_stays_local() {
        // Offload dominated: the relaxed solution is exactly x = 0, and the
        // branch comparison keeps it.
        let inst = instance(0.004, 0.5, 0.06, 85.0);
        let r = round_user(&inst, 1.0).unwrap();
        assert!(!r.offload);
        assert_eq!(r.ratio, 1.0);
    }

    #[test]
    fn empty_offload_interval_forces_local() {
        // Deadline below the floor-compressed offload delay.
        let inst = instance(0.01, 2.0, 0.02, 85.0);
        assert!(eta_bounds_true(&inst).is_none());
        let r = round_user(&inst, 0.5).unwrap();
        assert!(!r.offload);
    }

    #[test]
    fn equal_constants_tie_the_branches() {
        let inst = instance(0.01, 0.01, 0.06, 85.0);
        let local = local_branch(&inst).unwrap();
        let offload = offload_branch(&inst, 1.0).unwrap();
        assert!((local.objective - offload.objective).abs() <= 1e-12);
    }

    #[test]
    fn oracle_rejects_doubly_infeasible_users() {
        // Local misses the deadline; offload cannot reach the accuracy floor
        // within the deadline either.
        let inst = instance(0.08, 2.0, 0.02, 85.0);
        assert!(matches!(
            exact_user_oracle(&inst),
            Err(Error::UserInfeasible)
        ));
    }

    #[test]
    fn oracle_dominates_rounded_sca() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let mut close = 0usize;
        let mut total = 0usize;
        for _ in 0..1000 {
            let inst = feasible_random_instance(&mut rng);
            let Some(anchor) = init_anchor(&inst) else {
                continue;
            };
            let state = sca_iterate(std::slice::from_ref(&inst), &[anchor], 1e-4, 20).unwrap();
            let rounded = round_user(&inst, state.points[0].unwrap().eta).unwrap();
            let oracle = exact_user_oracle(&inst).unwrap();
            assert!(
                rounded.objective <= oracle.objective + 1e-6,
                "rounded beats the oracle: {} vs {}",
                rounded.objective,
                oracle.objective
            );
            total += 1;
            if rounded.objective >= oracle.objective - 0.01 {
                close += 1;
            }
        }
        assert!(
            close as f64 >= 0.95 * total as f64,
            "{close} of {total} within 0.01 of the oracle"
        );
    }

    #[test]
    fn rounded_output_respects_both_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..300 {
            let inst = feasible_random_instance(&mut rng);
            let Some(anchor) = init_anchor(&inst) else {
                continue;
            };
            let state = sca_iterate(std::slice::from_ref(&inst), &[anchor], 1e-4, 20).unwrap();
            let r = round_user(&inst, state.points[0].unwrap().eta).unwrap();
            let x = if r.offload { 1.0 } else { 0.0 };
            assert!(r.ratio >= 1.0);
            assert!(
                inst.true_delay(x, r.eta) <= inst.delay_limit * (1.0 + 1e-12),
                "delay limit violated"
            );
            assert!(
                inst.accuracy_at(r.eta) >= inst.accuracy_limit * (1.0 - 1e-12),
                "accuracy limit violated"
            );
        }
    }

    #[test]
    fn objective_concave_along_log_eta() {
        // Midpoint concavity of the per-user objective in ln(eta) for fixed
        // x, sampled over feasible geometric triples.
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..200 {
            let inst = feasible_random_instance(&mut rng);
            let Some((lo, hi)) = eta_bounds_true(&inst) else {
                continue;
            };
            if hi / lo < 1.01 {
                continue;
            }
            let u1 = rng.gen_range(lo.ln()..hi.ln());
            let u2 = rng.gen_range(lo.ln()..hi.ln());
            let mid = 0.5 * (u1 + u2);
            let g = |u: f64| inst.true_objective(1.0, u.exp());
            assert!(
                g(mid) >= 0.5 * (g(u1) + g(u2)) - 1e-9,
                "convex kink between {u1} and {u2}"
            );
        }
    }
}
