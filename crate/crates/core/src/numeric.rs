//! Shared numerical plumbing: bracketing root finder, adaptive Simpson
//! quadrature, cubic Hermite interpolation.

use crate::error::{Error, Result};

/// Bracketing root finder: bisection with secant acceleration.
///
/// Requires f(lo) and f(hi) of opposite sign. Converges to `xtol` in the
/// abscissa or `ftol` in the residual, whichever comes first.
pub fn bracket_root<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64, ftol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut flo = f(lo)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    let mut fhi = f(hi)?;
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..200 {
        // Secant candidate, accepted only if it lands well inside the bracket.
        let mid = 0.5 * (lo + hi);
        let sec = lo - flo * (hi - lo) / (fhi - flo);
        let x = if sec.is_finite() && sec > lo + 0.01 * (hi - lo) && sec < hi - 0.01 * (hi - lo) {
            sec
        } else {
            mid
        };
        let fx = f(x)?;
        if fx == 0.0 || fx.abs() <= ftol || (hi - lo).abs() <= xtol * x.abs().max(1.0) {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Adaptive Simpson quadrature to an absolute tolerance.
pub fn adaptive_simpson<F>(f: &F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if lo == hi {
        return Ok(0.0);
    }
    let fa = f(lo)?;
    let fb = f(hi)?;
    let m = 0.5 * (lo + hi);
    let fm = f(m)?;
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, lo, hi, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(
    f: &F,
    lo: f64,
    hi: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (lo + hi);
    let lm = 0.5 * (lo + m);
    let rm = 0.5 * (m + hi);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - lo) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (hi - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_rec(f, lo, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_rec(f, m, hi, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Cubic Hermite value on [x0, x1] given endpoint values and slopes.
pub fn hermite(x: f64, x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

/// Derivative of the cubic Hermite interpolant at x.
pub fn hermite_deriv(x: f64, x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let d00 = (6.0 * t2 - 6.0 * t) / h;
    let d10 = 3.0 * t2 - 4.0 * t + 1.0;
    let d01 = (-6.0 * t2 + 6.0 * t) / h;
    let d11 = 3.0 * t2 - 2.0 * t;
    d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1
}
