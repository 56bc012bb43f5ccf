//! Scalar root finding shared by the threshold solvers.

use thiserror::Error;

/// Interval-width target. Chosen well below the 1e-9 residual budget the
/// threshold solvers promise, so the residual slack is slope-independent for
/// slopes up to ~1e3.
pub const BISECT_WIDTH_TOL: f64 = 1e-12;
pub const BISECT_MAX_ITER: u32 = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("root finding did not reach width {tol} in {max_iter} iterations")]
    NoConvergence { tol: f64, max_iter: u32 },
}

/// Bisection on `[lo, hi]`. Requires `f(lo)` and `f(hi)` to straddle zero
/// (either endpoint may be exactly zero). Returns the midpoint of the final
/// bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64, RootError> {
    let (mut lo, mut hi) = (lo, hi);
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::NoBracket { lo, hi, f_lo, f_hi });
    }
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo < BISECT_WIDTH_TOL {
            return Ok(mid);
        }
        let f_mid = f(mid);
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
    Err(RootError::NoConvergence { tol: BISECT_WIDTH_TOL, max_iter: BISECT_MAX_ITER })
}

/// Evenly spaced grid with both endpoints included. `n >= 2`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| if k == n - 1 { hi } else { lo + step * k as f64 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn rejects_unbracketed_interval() {
        let e = bisect(|x| x * x + 1.0, -1.0, 1.0).unwrap_err();
        assert!(matches!(e, RootError::NoBracket { .. }));
    }

    #[test]
    fn endpoint_roots_are_returned_directly() {
        assert_eq!(bisect(|x| x, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(bisect(|x| x - 1.0, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn linspace_hits_both_ends() {
        let g = linspace(0.5, 3.0, 101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[100], 3.0);
    }
}
