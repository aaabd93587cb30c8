//! Period computation from phase-plane data.
//!
//! The period integrand 1/φ diverges like an inverse square root at the
//! turning points, so all integrals here go through tanh–sinh
//! (double-exponential) quadrature, which absorbs algebraic endpoint
//! singularities without knowing their exponent.

use crate::error::{Error, Result};
use crate::reduction::{ClosureReport, Verdict};
use std::f64::consts::{FRAC_PI_2, PI};

/// Truncation of the tanh–sinh abscissa; beyond this the node weight
/// underflows and nodes coincide with the endpoints in f64.
const T_MAX: f64 = 6.1;
const LEVEL_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodMethod {
    SymmetricQuadrature,
    TwoBranchQuadrature,
    Shooting,
}

impl PeriodMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            PeriodMethod::SymmetricQuadrature => "symmetric-quadrature",
            PeriodMethod::TwoBranchQuadrature => "two-branch-quadrature",
            PeriodMethod::Shooting => "shooting",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PeriodEstimate {
    /// Period in time units.
    pub t: f64,
    /// Estimated absolute error.
    pub err: f64,
    pub method: PeriodMethod,
}

impl PeriodEstimate {
    pub fn omega(&self) -> f64 {
        2.0 * PI / self.t
    }
}

/// A tanh–sinh node. The abscissa is `x`; `from_lo` and `from_hi` are
/// the distances to the interval endpoints, carried separately because
/// near a singular endpoint they hold far more precision than `x`
/// itself. Integrands with endpoint singularities should build the
/// vanishing factor from the distance, not from `x`.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub x: f64,
    pub from_lo: f64,
    pub from_hi: f64,
}

/// Tanh–sinh quadrature of g over [lo, hi], tolerant of algebraic
/// endpoint singularities.
///
/// Levels are doubled until successive sums differ by at most `tol` or
/// the level cap is reached; the returned error is the last inter-level
/// difference. Non-finite integrand values (or domain errors) within a
/// relative distance 1e-12 of an endpoint are treated as zero-measure
/// and skipped; anywhere else they are an error.
pub fn quad_singular<G>(g: G, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    G: Fn(&QuadPoint) -> Result<f64>,
{
    let half = 0.5 * (hi - lo);
    let width = (hi - lo).abs();
    let endpoint_slack = 1e-12 * width;

    let node = |t: f64| -> (QuadPoint, f64) {
        let u = FRAC_PI_2 * t.sinh();
        // distance from the nearer endpoint: half·(1 − |tanh u|) = half·2/(e^{2|u|}+1)
        let dist = 2.0 * half.abs() / ((2.0 * u.abs()).exp() + 1.0);
        let point = if t >= 0.0 {
            QuadPoint {
                x: hi - dist,
                from_lo: width - dist,
                from_hi: dist,
            }
        } else {
            QuadPoint {
                x: lo + dist,
                from_lo: dist,
                from_hi: width - dist,
            }
        };
        let weight = FRAC_PI_2 * t.cosh() * half / u.cosh().powi(2);
        (point, weight)
    };

    let eval = |p: &QuadPoint| -> Result<Option<f64>> {
        let near_edge = p.from_lo <= endpoint_slack || p.from_hi <= endpoint_slack;
        match g(p) {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            Ok(_) | Err(Error::Domain { .. }) if near_edge => Ok(None),
            Ok(_) => Err(Error::NonFiniteIntegrand { x: p.x }),
            Err(e) => Err(e),
        }
    };

    // Level 0: spacing 1.
    let mut h = 1.0;
    let mut sum = {
        let (p0, w0) = node(0.0);
        let mut s = eval(&p0)?.unwrap_or(0.0) * w0;
        let mut j = 1;
        while (j as f64) * h <= T_MAX {
            for t in [(j as f64) * h, -(j as f64) * h] {
                let (p, w) = node(t);
                if let Some(v) = eval(&p)? {
                    s += v * w;
                }
            }
            j += 1;
        }
        s * h
    };

    let mut last_delta = f64::INFINITY;
    #[allow(unused_assignments)]
    let mut prev_delta = f64::INFINITY;
    for level in 1..=LEVEL_CAP {
        h *= 0.5;
        // Only odd multiples of the new spacing are new nodes.
        let mut s_new = 0.0;
        let mut j = 1;
        while (j as f64) * h <= T_MAX {
            for t in [(j as f64) * h, -(j as f64) * h] {
                let (p, w) = node(t);
                if let Some(v) = eval(&p)? {
                    s_new += v * w;
                }
            }
            j += 2;
        }
        let refined = 0.5 * sum + h * s_new;
        prev_delta = last_delta;
        last_delta = (refined - sum).abs();
        sum = refined;
        if level >= 3 && last_delta <= tol {
            return Ok((sum, last_delta));
        }
        // Doubling a level should roughly square the error; a stalled
        // delta that is already tiny relative to the sum means the
        // integrand's roundoff floor was reached.
        if level >= 4
            && last_delta > 0.25 * prev_delta
            && last_delta <= 1e-9 * (sum.abs() + 1.0)
        {
            return Ok((sum, last_delta));
        }
    }
    if last_delta <= tol.max(1e-14 * (sum.abs() + 1.0)) {
        return Ok((sum, last_delta));
    }
    Err(Error::QuadratureNonConvergence {
        levels: LEVEL_CAP,
        delta: last_delta,
    })
}

/// T = 4·∫₀ᴬ dx/φ(x) for a symmetric orbit with φ ≥ 0 on [0, A].
///
/// φ receives the full quadrature node, so closed forms can build the
/// vanishing factor at x = A from `from_hi` without cancellation.
pub fn period_symmetric<P>(phi: P, amplitude: f64, tol: f64) -> Result<PeriodEstimate>
where
    P: Fn(&QuadPoint) -> Result<f64>,
{
    let interior_slack = 1e-12 * amplitude;
    let integrand = |p: &QuadPoint| -> Result<f64> {
        let speed = phi(p)?;
        if speed <= 0.0 && p.from_lo > interior_slack && p.from_hi > interior_slack {
            return Err(Error::NonPositivePhi { x: p.x });
        }
        Ok(1.0 / speed)
    };
    let (value, err) = quad_singular(integrand, 0.0, amplitude, tol)?;
    Ok(PeriodEstimate {
        t: 4.0 * value,
        err: 4.0 * err,
        method: PeriodMethod::SymmetricQuadrature,
    })
}

/// General closed-orbit period: time spent on each stored branch,
/// T = ∫ dx/|φ₋| over the departing branch plus ∫ dx/φ₊ over the
/// returning one.
pub fn period_two_branch(report: &ClosureReport, tol: f64) -> Result<PeriodEstimate> {
    if report.verdict != Verdict::Closed {
        return Err(Error::NotClosed {
            defect: report.defect,
        });
    }
    let mut total = 0.0;
    let mut err_total = 0.0;
    for branch in &report.branches {
        let (x_first, x_last) = branch.x_span();
        let (lo, hi) = if x_first < x_last {
            (x_first, x_last)
        } else {
            (x_last, x_first)
        };
        // Both integration endpoints are turning points of the branch;
        // interpolate from the nearer one in distance space so the
        // vanishing factor of u stays accurate.
        let start_is_lo = x_first < x_last;
        let integrand = |p: &QuadPoint| -> Result<f64> {
            let near_lo = p.from_lo <= p.from_hi;
            let dist = p.from_lo.min(p.from_hi);
            let u = if near_lo == start_is_lo {
                branch.u_from_start(dist)?
            } else {
                branch.u_from_turning(dist)?
            };
            Ok(1.0 / u.sqrt())
        };
        let (value, err) = quad_singular(integrand, lo, hi, tol)?;
        total += value;
        err_total += err;
    }
    Ok(PeriodEstimate {
        t: total,
        err: err_total,
        method: PeriodMethod::TwoBranchQuadrature,
    })
}
