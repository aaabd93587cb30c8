//! Phase-plane reduction: integrate the first-integral ODE from the
//! singular turning-point condition φ(A) = 0.
//!
//! The φ-equation dφ/dx = f(x, φ)/φ has infinite slope at a turning
//! point, so branches are integrated in u = φ², which satisfies the
//! regular equation du/dx = 2 f(x, σ√u) with σ the velocity sign of the
//! branch. Departure from the turning point is seeded with the two-term
//! series u(s) = a·s + b·s^{3/2}, s = d·(x − x₀).

use crate::error::{Error, Result};
use crate::numeric::{hermite, hermite_deriv};
use crate::rk::{integrate, StepControl};
use crate::system::OscillatorSystem;
use std::ops::ControlFlow;

/// Turning-point localization tolerance in x.
const TURN_TOL: f64 = 1e-12;
/// Guard limits.
const MAX_STEPS: usize = 1_000_000;
const X_GUARD_FACTOR: f64 = 1e3;
const U_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn of(value: f64) -> Sign {
        if value >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Where a branch starts and which way it runs.
#[derive(Debug, Clone, Copy)]
pub struct BranchSpec {
    /// Turning-point abscissa x₀.
    pub start: f64,
    /// +1 rightward, −1 leftward in x.
    pub direction: Sign,
    /// φ = σ·√u on this branch.
    pub velocity_sign: Sign,
}

/// A sampled phase-plane branch: u(x) = φ(x)² on a monotone x-grid, with
/// slopes stored for cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct BranchProfile {
    pub spec: BranchSpec,
    /// Strictly monotone, starting at the turning point.
    pub grid: Vec<f64>,
    pub u_values: Vec<f64>,
    /// du/dx at each grid node.
    pub du_dx: Vec<f64>,
    /// x where u returns to 0, if the branch turned before any guard.
    pub end_turning_point: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Closed,
    NotClosed,
    NoOscillation,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Closed => "closed",
            Verdict::NotClosed => "not-closed",
            Verdict::NoOscillation => "no-oscillation",
        }
    }
}

/// Outcome of the two-branch closure test at amplitude A.
#[derive(Debug, Clone)]
pub struct ClosureReport {
    pub amplitude: f64,
    /// Turning point reached by the first (departing) branch.
    pub lower_turning: f64,
    /// Turning point reached by the returning branch.
    pub return_point: f64,
    /// δ = x_R − A; zero iff the orbit closes.
    pub defect: f64,
    pub verdict: Verdict,
    pub branches: [BranchProfile; 2],
    pub closure_tol: f64,
}

/// Coefficients of the departure series u(s) = a·s + b·s^{3/2}.
///
/// Matching powers of √s in du/ds = 2·d·f(x₀ + d·s, σ√u) gives
/// a = 2·d·f(x₀, 0) and b = (4/3)·d·σ·f_v(x₀, 0)·√a.
pub fn seed_coefficients(sys: &OscillatorSystem, spec: &BranchSpec) -> Result<(f64, f64)> {
    let d = spec.direction.as_f64();
    let sigma = spec.velocity_sign.as_f64();
    let at_start = sys.eval_full(spec.start, 0.0)?;
    let a = 2.0 * d * at_start.value;
    if a <= 0.0 {
        return Err(Error::NoOscillation { a });
    }
    let b = (4.0 / 3.0) * d * sigma * at_start.d_v * a.sqrt();
    Ok((a, b))
}

/// The s² coefficient of the departure series, from matching the O(s)
/// terms of du/ds = 2·d·f(x₀ + d·s, σ√u). Without it the seed handoff
/// carries an O(h₀²) bias that the stepper cannot recover.
fn seed_quadratic(sys: &OscillatorSystem, spec: &BranchSpec, a: f64, b: f64) -> Result<f64> {
    let d = spec.direction.as_f64();
    let sigma = spec.velocity_sign.as_f64();
    let at_start = sys.eval_full(spec.start, 0.0)?;
    Ok(at_start.d_x
        + 0.5 * d * sigma * at_start.d_v * b / a.sqrt()
        + 0.5 * d * at_start.d_vv * a)
}

impl BranchProfile {
    fn interval_of(&self, x: f64) -> Result<usize> {
        let n = self.grid.len();
        let (first, last) = (self.grid[0], self.grid[n - 1]);
        let ascending = last > first;
        let (lo, hi) = if ascending { (first, last) } else { (last, first) };
        let slack = 1e-9 * (hi - lo).abs().max(1.0);
        if x < lo - slack || x > hi + slack {
            return Err(Error::InterpolationGap { x, lo, hi });
        }
        let pos = self
            .grid
            .partition_point(|&g| if ascending { g <= x } else { g >= x });
        Ok(pos.clamp(1, n - 1) - 1)
    }

    /// Cubic Hermite interpolation of u at x, clamped to u ≥ 0.
    pub fn u_at(&self, x: f64) -> Result<f64> {
        let i = self.interval_of(x)?;
        let u = hermite(
            x,
            self.grid[i],
            self.grid[i + 1],
            self.u_values[i],
            self.u_values[i + 1],
            self.du_dx[i],
            self.du_dx[i + 1],
        );
        Ok(u.max(0.0))
    }

    /// du/dx of the interpolant at x.
    pub fn du_dx_at(&self, x: f64) -> Result<f64> {
        let i = self.interval_of(x)?;
        Ok(hermite_deriv(
            x,
            self.grid[i],
            self.grid[i + 1],
            self.u_values[i],
            self.u_values[i + 1],
            self.du_dx[i],
            self.du_dx[i + 1],
        ))
    }

    /// u at an unsigned distance from the branch start, interpolated in
    /// distance space. Near the start the vanishing factor keeps full
    /// relative precision, where evaluating at x = start ± dist would
    /// quantize the distance to the ulp of the abscissa.
    pub fn u_from_start(&self, dist: f64) -> Result<f64> {
        self.u_from_anchor(dist, false)
    }

    /// Same, with the distance measured from the closing turning point.
    pub fn u_from_turning(&self, dist: f64) -> Result<f64> {
        self.u_from_anchor(dist, true)
    }

    fn u_from_anchor(&self, dist: f64, from_end: bool) -> Result<f64> {
        let n = self.grid.len();
        let idx = |i: usize| if from_end { n - 1 - i } else { i };
        let anchor = self.grid[idx(0)];
        let offset = |i: usize| (self.grid[idx(i)] - anchor).abs();
        let span = offset(n - 1);
        let slack = 1e-9 * span.max(1.0);
        if !(-slack..=span + slack).contains(&dist) {
            let (lo, hi) = self.x_span();
            return Err(Error::InterpolationGap {
                x: anchor,
                lo: lo.min(hi),
                hi: lo.max(hi),
            });
        }
        let d = dist.clamp(0.0, span);
        let (mut k0, mut k1) = (0usize, n - 1);
        while k1 - k0 > 1 {
            let mid = (k0 + k1) / 2;
            if offset(mid) <= d {
                k0 = mid;
            } else {
                k1 = mid;
            }
        }
        let (i0, i1) = (idx(k0), idx(k1));
        // dx/d(dist) along the traversal from the anchor.
        let sgn = if self.grid[i1] > self.grid[i0] { 1.0 } else { -1.0 };
        let u = hermite(
            d,
            offset(k0),
            offset(k1),
            self.u_values[i0],
            self.u_values[i1],
            sgn * self.du_dx[i0],
            sgn * self.du_dx[i1],
        );
        Ok(u.max(0.0))
    }

    /// Signed phase velocity σ·√u at x.
    pub fn phi_at(&self, x: f64) -> Result<f64> {
        Ok(self.spec.velocity_sign.as_f64() * self.u_at(x)?.sqrt())
    }

    /// (first, last) grid abscissae.
    pub fn x_span(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }
}

/// Integrate one branch of u = φ² away from its turning point.
///
/// Stops at a returning turning point (u back to 0), at `x_stop`, or
/// with an error when a guard trips.
pub fn integrate_branch(
    sys: &OscillatorSystem,
    spec: &BranchSpec,
    tol: f64,
    x_stop: Option<f64>,
) -> Result<BranchProfile> {
    let (a, b) = seed_coefficients(sys, spec)?;
    let d = spec.direction.as_f64();
    let sigma = spec.velocity_sign.as_f64();
    let x0 = spec.start;

    // Branch ODE in the arclength s = d·(x − x₀) ≥ 0.
    let rhs = |s: f64, u: &[f64; 1]| -> Result<[f64; 1]> {
        let x = x0 + d * s;
        let phi = sigma * u[0].max(0.0).sqrt();
        Ok([2.0 * d * sys.eval(x, phi)?])
    };

    // Series seed over the first interval, clear of the √u stiffness.
    let c = seed_quadratic(sys, spec, a, b)?;
    // Small enough that the truncated departure series hands off with
    // relative error below the quadrature tolerances downstream.
    let h0 = 1e-5_f64.min(1e-4 * x0.abs()).max(1e-9);
    let u0 = a * h0 + b * h0.powf(1.5) + c * h0 * h0;
    if u0 <= 0.0 {
        return Err(Error::NoOscillation { a });
    }

    let mut grid = vec![x0, x0 + d * h0];
    let mut u_values = vec![0.0, u0];
    let mut du_dx = vec![2.0 * sys.eval(x0, 0.0)?, d * rhs(h0, &[u0])?[0]];

    let x_guard = X_GUARD_FACTOR * x0.abs().max(1.0);
    let s_stop = x_stop.map(|xs| d * (xs - x0));
    let mut end_turning_point = None;
    let mut done = false;

    let ctrl = StepControl {
        tol,
        // Cap the step so the stored cubic interpolant stays faithful to
        // the ODE between nodes.
        h_max: 0.005 * x0.abs().max(1.0),
        max_steps: MAX_STEPS,
    };

    integrate(rhs, h0, [u0], h0, &ctrl, |_s0, s1, u, du, dense| {
        // Turning point: u dropped to (or through) zero.
        if u[0] <= 0.0 {
            let s_turn = bisect_dense_zero(dense, TURN_TOL)?;
            let x_turn = x0 + d * s_turn;
            grid.push(x_turn);
            u_values.push(0.0);
            du_dx.push(2.0 * sys.eval(x_turn, 0.0)?);
            end_turning_point = Some(x_turn);
            done = true;
            return Ok(ControlFlow::Break(()));
        }
        // Requested stopping abscissa.
        if let Some(ss) = s_stop {
            if s1 >= ss {
                let u_stop = dense.eval(ss)[0].max(0.0);
                grid.push(x0 + d * ss);
                u_values.push(u_stop);
                du_dx.push(d * rhs(ss, &[u_stop])?[0]);
                done = true;
                return Ok(ControlFlow::Break(()));
            }
        }
        // Guards.
        if u[0].abs() > U_GUARD {
            return Err(Error::BlowUp {
                what: "u".into(),
                x: x0 + d * s1,
            });
        }
        if (x0 + d * s1).abs() > x_guard {
            return Err(Error::NonReturning {
                reason: format!("|x| exceeded {x_guard}"),
            });
        }
        grid.push(x0 + d * s1);
        u_values.push(u[0]);
        du_dx.push(d * du[0]);
        Ok(ControlFlow::Continue(()))
    })?;

    if !done {
        return Err(Error::NonReturning {
            reason: "integration ended before a turning point or x_stop".into(),
        });
    }

    Ok(BranchProfile {
        spec: *spec,
        grid,
        u_values,
        du_dx,
        end_turning_point,
    })
}

/// Bisect the dense output of the final step for u = 0, to `xtol` in s.
fn bisect_dense_zero(dense: &crate::rk::DenseStep<1>, xtol: f64) -> Result<f64> {
    let mut lo = dense.t0;
    let mut hi = dense.t0 + dense.h;
    let u_lo = dense.eval(lo)[0];
    if u_lo <= 0.0 {
        return Ok(lo);
    }
    for _ in 0..200 {
        if hi - lo <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if dense.eval(mid)[0] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two-branch closure test at amplitude A: integrate away from (A, 0),
/// turn, integrate back, and report the defect δ = x_R − A.
pub fn closure_defect(sys: &OscillatorSystem, amplitude: f64, tol: f64) -> Result<ClosureReport> {
    // The orbit launched from rest at the right amplitude departs
    // leftward on the lower (φ < 0) branch; a repulsive f(A, 0) ≥ 0
    // surfaces as a nonpositive seed coefficient there.
    let (d1, s1) = (Sign::Minus, Sign::Minus);

    let first = integrate_branch(
        sys,
        &BranchSpec {
            start: amplitude,
            direction: d1,
            velocity_sign: s1,
        },
        tol,
        None,
    )?;
    let lower_turning = first.end_turning_point.ok_or(Error::NonReturning {
        reason: "first branch did not turn".into(),
    })?;

    let second = integrate_branch(
        sys,
        &BranchSpec {
            start: lower_turning,
            direction: d1.flip(),
            velocity_sign: s1.flip(),
        },
        tol,
        None,
    )?;
    let return_point = second.end_turning_point.ok_or(Error::NonReturning {
        reason: "returning branch did not turn".into(),
    })?;

    let defect = return_point - amplitude;
    let closure_tol = (100.0 * tol).max(1e-8);
    let verdict = if defect.abs() <= closure_tol {
        Verdict::Closed
    } else {
        Verdict::NotClosed
    };
    Ok(ClosureReport {
        amplitude,
        lower_turning,
        return_point,
        defect,
        verdict,
        branches: [first, second],
        closure_tol,
    })
}

/// Root-find the closure defect over a bracket [A_lo, A_hi].
///
/// Errors if the defect does not change sign, or if it is numerically
/// zero across the whole bracket (a conservative family, where every
/// amplitude is periodic and no isolated root exists).
pub fn find_limit_cycle_amplitude(
    sys: &OscillatorSystem,
    a_lo: f64,
    a_hi: f64,
    tol: f64,
) -> Result<f64> {
    let inner_tol = 1e-10_f64.min(tol);
    let report_lo = closure_defect(sys, a_lo, inner_tol)?;
    let report_hi = closure_defect(sys, a_hi, inner_tol)?;
    let flat = report_lo.closure_tol.max(report_hi.closure_tol);
    if report_lo.defect.abs() <= flat && report_hi.defect.abs() <= flat {
        return Err(Error::ConservativeFamily);
    }
    if report_lo.defect.signum() == report_hi.defect.signum() {
        return Err(Error::NoSignChange { lo: a_lo, hi: a_hi });
    }
    crate::numeric::bracket_root(
        |a| Ok(closure_defect(sys, a, inner_tol)?.defect),
        a_lo,
        a_hi,
        0.0,
        tol,
    )
}
