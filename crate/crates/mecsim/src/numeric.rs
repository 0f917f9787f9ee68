//! Scalar root bracketing and one-dimensional concave maximization.
//!
//! Both solvers share these kernels: the capacity allocator drives its
//! multiplier search through [`bisect_root`], and the compression solver
//! and its verification oracle maximize one-dimensional concave slices
//! through [`maximize_concave_1d`].

/// Default absolute tolerance for bisection.
pub const DEFAULT_BISECT_TOL: f64 = 1e-10;
/// Default argument tolerance for golden-section search.
pub const DEFAULT_GOLDEN_TOL: f64 = 1e-8;
/// Default iteration cap for both kernels.
pub const DEFAULT_MAX_ITER: usize = 200;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, thiserror::Error)]
pub enum NumericError {
    #[error("no sign change over [{lo}, {hi}]: f(lo)={f_lo:.6e}, f(hi)={f_hi:.6e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("no convergence within {max_iter} iterations; best iterate {best:.12e}")]
    MaxIterExceeded { max_iter: usize, best: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
}

/// A scalar root-finding problem on a bracketing interval.
pub struct BracketedScalarProblem<F: Fn(f64) -> f64> {
    pub evaluate: F,
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl<F: Fn(f64) -> f64> BracketedScalarProblem<F> {
    pub fn new(evaluate: F, lo: f64, hi: f64) -> Self {
        Self {
            evaluate,
            lo,
            hi,
            tol: DEFAULT_BISECT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Bisection on a sign-changing bracket. Returns the midpoint of the final
/// interval; the interval width halves each iteration.
pub fn bisect_root<F: Fn(f64) -> f64>(p: &BracketedScalarProblem<F>) -> Result<f64, NumericError> {
    if !(p.lo < p.hi) || !(p.tol > 0.0) {
        return Err(NumericError::InvalidInterval { lo: p.lo, hi: p.hi });
    }
    let mut lo = p.lo;
    let mut hi = p.hi;
    let f_lo = (p.evaluate)(lo);
    let f_hi = (p.evaluate)(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(NumericError::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let mut f_lo = f_lo;
    for _ in 0..p.max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= p.tol {
            return Ok(mid);
        }
        let f_mid = (p.evaluate)(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(NumericError::MaxIterExceeded {
        max_iter: p.max_iter,
        best: 0.5 * (lo + hi),
    })
}

/// Golden-section search for the maximum of a concave (or unimodal)
/// function on `[lo, hi]`. Returns `(argmax, max)`. Never evaluates
/// outside the interval.
pub fn maximize_concave_1d<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64), NumericError> {
    if lo > hi || !lo.is_finite() || !hi.is_finite() {
        return Err(NumericError::InvalidInterval { lo, hi });
    }
    if hi - lo <= tol {
        let mid = 0.5 * (lo + hi);
        return Ok((mid, f(mid)));
    }
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        Ok((x1, f1))
    } else {
        Ok((x2, f2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    #[test]
    fn bisect_linear_root() {
        let p = BracketedScalarProblem::new(|x| x - 2.0, 0.0, 10.0);
        let root = bisect_root(&p).unwrap();
        assert!((root - 2.0).abs() <= 1e-9, "root = {root}");
    }

    #[test]
    fn bisect_sqrt2_matches_direct_evaluation() {
        let p = BracketedScalarProblem::new(|x| x * x - 2.0, 0.0, 2.0);
        let root = bisect_root(&p).unwrap();
        assert!((root - 2.0_f64.sqrt()).abs() <= 1e-9, "root = {root}");
    }

    #[test]
    fn bisect_rejects_same_sign_bracket() {
        let p = BracketedScalarProblem::new(|x| x + 1.0, 0.0, 1.0);
        assert!(matches!(
            bisect_root(&p),
            Err(NumericError::NoSignChange { .. })
        ));
    }

    #[test]
    fn bisect_iteration_bound() {
        // Interval width halves per step, so convergence needs at most
        // ceil(log2(width / tol)) evaluations past the endpoints.
        let count = Cell::new(0usize);
        let p = BracketedScalarProblem::new(
            |x| {
                count.set(count.get() + 1);
                x - 0.3
            },
            0.0,
            1.0,
        );
        bisect_root(&p).unwrap();
        let bound = ((1.0f64 / DEFAULT_BISECT_TOL).log2().ceil() as usize) + 3;
        assert!(count.get() <= bound, "{} evaluations", count.get());
    }

    #[test]
    fn golden_quadratic_vertex() {
        let (x, v) = maximize_concave_1d(|x| -(x - 3.0) * (x - 3.0), 0.0, 10.0, 1e-8).unwrap();
        assert!((x - 3.0).abs() <= 1e-6, "argmax = {x}");
        assert!((-1e-12..=0.0).contains(&v));
    }

    #[test]
    fn golden_log_minus_linear() {
        let (x, _) = maximize_concave_1d(|x| x.ln() - x, 0.1, 5.0, 1e-8).unwrap();
        assert!((x - 1.0).abs() <= 1e-6, "argmax = {x}");
    }

    #[test]
    fn golden_agrees_with_grid_scan() {
        // Concave sample versus a dense grid oracle.
        let f = |x: f64| (1.0 + x).ln() - 0.37 * x * x;
        let (x_gold, _) = maximize_concave_1d(f, 0.0, 4.0, 1e-8).unwrap();
        let mut best_x = 0.0;
        let mut best_v = f64::NEG_INFINITY;
        let n = 1_000_000;
        for i in 0..=n {
            let x = 4.0 * i as f64 / n as f64;
            let v = f(x);
            if v > best_v {
                best_v = v;
                best_x = x;
            }
        }
        assert!((x_gold - best_x).abs() <= 1e-4, "{x_gold} vs {best_x}");
    }

    #[test]
    fn golden_stays_inside_interval() {
        let (lo, hi) = (0.25, 0.75);
        let (x, _) = maximize_concave_1d(
            |x| {
                assert!((lo..=hi).contains(&x), "evaluated outside interval: {x}");
                -(x - 0.5) * (x - 0.5)
            },
            lo,
            hi,
            1e-10,
        )
        .unwrap();
        assert!((x - 0.5).abs() <= 1e-8);
    }

    #[test]
    fn golden_rejects_inverted_interval() {
        assert!(matches!(
            maximize_concave_1d(|x| x, 1.0, 0.0, 1e-8),
            Err(NumericError::InvalidInterval { .. })
        ));
    }
}
