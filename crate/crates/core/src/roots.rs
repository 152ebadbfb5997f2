//! Scalar root finding used throughout the crate.

use crate::error::{Error, Result};

/// Safeguarded Newton iteration on a sign-changing bracket `[lo, hi]`.
///
/// `f` returns the value and derivative. A Newton step that leaves the
/// current bracket, or fails to halve it quickly enough, is replaced by a
/// bisection step.
pub fn newton_bracketed<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    what: &'static str,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    const MAX_ITER: usize = 200;
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSolution(format!(
            "{what}: bracket [{lo}, {hi}] does not change sign"
        )));
    }
    // orient so that f(lo) < 0
    if flo > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut x = 0.5 * (lo + hi);
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = f(x);
    for _ in 0..MAX_ITER {
        let newton_leaves = ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) > 0.0;
        let too_slow = (2.0 * fx).abs() > (dx_old * dfx).abs();
        dx_old = dx;
        if newton_leaves || too_slow || dfx == 0.0 {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        } else {
            dx = fx / dfx;
            x -= dx;
        }
        if dx.abs() <= xtol * x.abs().max(1.0) {
            return Ok(x);
        }
        let next = f(x);
        fx = next.0;
        dfx = next.1;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(x);
        }
    }
    Err(Error::Convergence {
        what,
        iterations: MAX_ITER,
        residual: fx.abs(),
    })
}

/// Grows `hi` geometrically from `start` until `sign(f(hi)) != sign(f(lo))`.
pub fn expand_upper<F>(f: F, lo: f64, start: f64, factor: f64, limit: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let reference = f(lo).signum();
    let mut hi = start;
    while hi <= limit {
        if f(hi).signum() != reference {
            return Some(hi);
        }
        hi *= factor;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root_of_two() {
        let r =
            newton_bracketed(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1e-15, "cbrt").unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn falls_back_to_bisection_on_flat_derivative() {
        // derivative deliberately wrong: the safeguard must still converge
        let r = newton_bracketed(|x| (x - 0.3, 0.0), -1.0, 1.0, 1e-14, "flat").unwrap();
        assert!((r - 0.3).abs() < 1e-13);
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        let err = newton_bracketed(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12, "none");
        assert!(matches!(err, Err(Error::NoSolution(_))));
    }

    #[test]
    fn expands_until_sign_change() {
        let hi = expand_upper(|x| 10.0 - x, 1.0, 2.0, 2.0, 1e6).unwrap();
        assert_eq!(hi, 16.0);
        assert!(expand_upper(|x| 1.0 + x, 1.0, 2.0, 2.0, 1e3).is_none());
    }
}
