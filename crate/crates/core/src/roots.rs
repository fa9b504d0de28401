//! Bracketed bisection for monotone scalar equations.
//!
//! Every transcendental equation in this crate has a monotone left-hand side,
//! so plain bisection with bracket expansion is used throughout.

use thiserror::Error;

/// Iteration cap shared by bracket expansion and bisection.
pub const MAX_ITER: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("could not bracket a root starting from [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("function returned NaN at {at}")]
    NotANumber { at: f64 },
}

/// Stopping rule for [`bisect`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Stop once `hi - lo <= abs + rel * |mid|`.
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    /// `|Δx| <= 1e-12 (1 + |x|)`.
    pub const DEFAULT: Tolerance = Tolerance { abs: 1e-12, rel: 1e-12 };

    /// Scale-free rule for roots that may sit arbitrarily close to zero.
    pub const RELATIVE: Tolerance = Tolerance { abs: 0.0, rel: 4e-16 };
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Finds `x` in `[lo, hi]` with `f(x) = 0` for a function whose sign changes
/// on the bracket. Returns the midpoint of the final bracket.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: Tolerance) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.is_nan() {
        return Err(RootError::NotANumber { at: lo });
    }
    if f_hi.is_nan() {
        return Err(RootError::NotANumber { at: hi });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::NoBracket { lo, hi });
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol.abs + tol.rel * mid.abs() || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid.is_nan() {
            return Err(RootError::NotANumber { at: mid });
        }
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
    Ok(0.5 * (lo + hi))
}

/// Solves `g(x) = target` on `(lo, ∞)` for nondecreasing `g`, doubling the
/// right end of the bracket from `start` until `g` reaches the target.
pub fn solve_increasing<G>(
    mut g: G,
    target: f64,
    lo: f64,
    start: f64,
    tol: Tolerance,
) -> Result<f64, RootError>
where
    G: FnMut(f64) -> f64,
{
    let mut hi = start.max(lo + f64::MIN_POSITIVE);
    let mut low = lo;
    let mut expansions = 0;
    while g(hi) < target {
        low = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > MAX_ITER || !hi.is_finite() {
            return Err(RootError::NoBracket { lo, hi });
        }
    }
    bisect(|x| g(x) - target, low, hi, tol)
}

/// Solves `g(x) = target` on `(0, ∞)` for strictly decreasing `g`: expands
/// the bracket geometrically in both directions from `start`.
pub fn solve_decreasing<G>(mut g: G, target: f64, start: f64, tol: Tolerance) -> Result<f64, RootError>
where
    G: FnMut(f64) -> f64,
{
    let mut lo = start;
    let mut hi = start;
    let mut n = 0;
    while g(lo) <= target {
        lo *= 0.5;
        n += 1;
        if n > MAX_ITER || lo == 0.0 {
            return Err(RootError::NoBracket { lo, hi });
        }
    }
    n = 0;
    while g(hi) > target {
        hi *= 2.0;
        n += 1;
        if n > MAX_ITER || !hi.is_finite() {
            return Err(RootError::NoBracket { lo, hi });
        }
    }
    bisect(|x| g(x) - target, lo, hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, Tolerance::DEFAULT).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn bisect_rejects_missing_bracket() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, Tolerance::DEFAULT),
            Err(RootError::NoBracket { .. })
        ));
    }

    #[test]
    fn expansion_reaches_far_roots() {
        let r = solve_increasing(|x| x.ln(), 50.0, 0.0, 1.0, Tolerance::RELATIVE).unwrap();
        assert!((r.ln() - 50.0).abs() < 1e-12);
        let r = solve_decreasing(|x| 1.0 / x, 1e-9, 1.0, Tolerance::RELATIVE).unwrap();
        assert!((r / 1e9 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn relative_tolerance_resolves_tiny_roots() {
        let r = bisect(|x| x - 1e-30, 0.0, 1.0, Tolerance::RELATIVE).unwrap();
        assert!((r / 1e-30 - 1.0).abs() < 1e-12);
    }
}
