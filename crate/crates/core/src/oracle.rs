//! Independent time-domain ground truth: adaptive integration of
//! ẍ = f(x, ẋ) with velocity-zero event detection, period and
//! steady-amplitude measurement, and the trajectory residual
//! d/dt(∂f/∂ẋ) + ∂f/∂x.

use crate::error::{Error, Result};
use crate::rk::{integrate, StepControl};
use crate::system::OscillatorSystem;
use std::ops::ControlFlow;

/// Time tolerance for event localization.
const EVENT_TOL: f64 = 1e-12;
/// State magnitude guard.
const STATE_GUARD: f64 = 1e6;
/// Cap on total simulated time in `steady_amplitude`.
const MAX_SETTLE_TIME: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// v passes from negative to positive.
    Upward,
    /// v passes from positive to negative.
    Downward,
}

#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub direction: Crossing,
}

#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

/// A simulated trajectory with its v = 0 events.
#[derive(Debug, Clone)]
pub struct OrbitTrace {
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
}

/// Integrate (ẋ, v̇) = (v, f(x, v)) from (x0, v0) to t_end.
///
/// Velocity-zero crossings are bisected on the dense output to a time
/// tolerance of 1e-12. A start with v0 = 0 and f(x0, 0) ≠ 0 is itself
/// recorded as an event, with the crossing direction of the departure.
pub fn simulate(
    sys: &OscillatorSystem,
    x0: f64,
    v0: f64,
    t_end: f64,
    tol: f64,
) -> Result<OrbitTrace> {
    let rhs = |_t: f64, y: &[f64; 2]| -> Result<[f64; 2]> { Ok([y[1], sys.eval(y[0], y[1])?]) };

    let mut samples = vec![Sample {
        t: 0.0,
        x: x0,
        v: v0,
    }];
    let mut events = Vec::new();
    if v0 == 0.0 {
        let accel = sys.eval(x0, 0.0)?;
        if accel != 0.0 {
            events.push(Event {
                t: 0.0,
                x: x0,
                direction: if accel > 0.0 {
                    Crossing::Upward
                } else {
                    Crossing::Downward
                },
            });
        }
    }

    let ctrl = StepControl {
        tol,
        h_max: 0.1,
        max_steps: 1_000_000,
    };
    let mut v_prev = v0;

    integrate(rhs, 0.0, [x0, v0], 1e-4, &ctrl, |t0, t1, y, _dy, dense| {
        let (t1, y) = if t1 >= t_end {
            // Truncate the final step at t_end.
            (t_end, dense.eval(t_end))
        } else {
            (t1, *y)
        };
        if y[0].abs() > STATE_GUARD || y[1].abs() > STATE_GUARD {
            return Err(Error::BlowUp {
                what: "state".into(),
                x: y[0],
            });
        }
        // Event: v changed sign across this step.
        if v_prev != 0.0 && (y[1] == 0.0 || v_prev.signum() != y[1].signum()) {
            let mut lo = t0;
            let mut hi = t1;
            while hi - lo > EVENT_TOL {
                let tm = 0.5 * (lo + hi);
                if dense.eval(tm)[1].signum() == v_prev.signum() {
                    lo = tm;
                } else {
                    hi = tm;
                }
            }
            let te = 0.5 * (lo + hi);
            let ye = dense.eval(te);
            events.push(Event {
                t: te,
                x: ye[0],
                direction: if v_prev < 0.0 {
                    Crossing::Upward
                } else {
                    Crossing::Downward
                },
            });
        }
        v_prev = y[1];
        samples.push(Sample {
            t: t1,
            x: y[0],
            v: y[1],
        });
        if t1 >= t_end {
            return Ok(ControlFlow::Break(()));
        }
        Ok(ControlFlow::Continue(()))
    })?;

    Ok(OrbitTrace { samples, events })
}

/// Period from a trace started at an event: time from the start to the
/// next event with the same crossing direction (one full revolution),
/// together with the x reached there.
pub fn measure_period(trace: &OrbitTrace) -> Result<(f64, f64)> {
    let start = trace.events.first().ok_or(Error::InsufficientEvents {
        found: 0,
        need: 2,
    })?;
    if start.t != trace.samples[0].t {
        return Err(Error::InsufficientEvents {
            found: trace.events.len(),
            need: 2,
        });
    }
    let matching = trace
        .events
        .iter()
        .skip(1)
        .find(|e| e.direction == start.direction)
        .ok_or(Error::InsufficientEvents {
            found: trace.events.len(),
            need: 2,
        })?;
    Ok((matching.t - start.t, matching.x))
}

/// Simulate from (x0, 0) until the same-direction event amplitudes
/// settle; returns the limiting amplitude and period.
///
/// Convergence means three consecutive amplitude differences at or below
/// `tol`. Amplitudes decaying below a floor of 1e-3·max(1, |x0|) are
/// reported as the absence of a periodic attractor rather than a limit
/// of zero.
pub fn steady_amplitude(sys: &OscillatorSystem, x0: f64, tol: f64) -> Result<(f64, f64)> {
    let floor = 1e-3 * x0.abs().max(1.0);
    let chunk = 50.0;
    let mut state = (x0, 0.0);
    let mut elapsed = 0.0;
    // |x| at events matching the start direction, with their times.
    let mut amplitudes: Vec<(f64, f64)> = Vec::new();
    let mut start_direction = None;

    while elapsed < MAX_SETTLE_TIME {
        let trace = simulate(sys, state.0, state.1, chunk, 1e-10)?;
        let dir = *start_direction
            .get_or_insert_with(|| trace.events.first().map(|e| e.direction));
        if let Some(dir) = dir {
            for e in trace.events.iter().filter(|e| e.direction == dir) {
                if e.t == 0.0 && elapsed > 0.0 {
                    continue; // chunk seam duplicate
                }
                amplitudes.push((elapsed + e.t, e.x.abs()));
            }
        }
        let n = amplitudes.len();
        if n >= 4 {
            let settled = (1..4).all(|k| {
                (amplitudes[n - k].1 - amplitudes[n - k - 1].1).abs() <= tol
            });
            if settled {
                let a_star = amplitudes[n - 1].1;
                if a_star < floor {
                    return Err(Error::NoPeriodicAttractor);
                }
                let t_star = amplitudes[n - 1].0 - amplitudes[n - 2].0;
                return Ok((a_star, t_star));
            }
            // Plain decay to rest: every recent amplitude below the floor.
            if (1..=4).all(|k| amplitudes[n - k].1 < floor) {
                return Err(Error::NoPeriodicAttractor);
            }
        }
        let last = trace.samples.last().unwrap();
        state = (last.x, last.v);
        elapsed += last.t;
    }
    Err(Error::NoConvergence {
        t_max: MAX_SETTLE_TIME,
    })
}

/// The trajectory residual d/dt(∂f/∂ẋ) + ∂f/∂x, expanded on-shell:
/// f_vx·v + f_vv·f(x, v) + f_x.
pub fn el_residual(sys: &OscillatorSystem, x: f64, v: f64) -> Result<f64> {
    let d = sys.eval_full(x, v)?;
    Ok(d.d_xv * v + d.d_vv * d.value + d.d_x)
}

/// `el_residual` evaluated at every sample of a trace.
pub fn el_residual_series(sys: &OscillatorSystem, trace: &OrbitTrace) -> Result<Vec<f64>> {
    trace
        .samples
        .iter()
        .map(|s| el_residual(sys, s.x, s.v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn sys(src: &str) -> OscillatorSystem {
        OscillatorSystem::parse(src).unwrap()
    }

    #[test]
    fn harmonic_returns_after_two_pi() {
        let trace = simulate(&sys("-x"), 1.0, 0.0, 10.0, 1e-10).unwrap();
        let (t, a) = measure_period(&trace).unwrap();
        assert_relative_eq!(t, 2.0 * PI, epsilon = 1e-8);
        assert_relative_eq!(a, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn damped_linear_loses_amplitude() {
        let trace = simulate(&sys("-x - 0.1*v"), 1.0, 0.0, 30.0, 1e-10).unwrap();
        let (_, a) = measure_period(&trace).unwrap();
        assert!(a < 1.0 - 1e-3);
    }

    #[test]
    fn mickens_orbit_closes() {
        let trace = simulate(&sys("-x*(1+v^2)"), 1.0, 0.0, 20.0, 1e-10).unwrap();
        let (_, a) = measure_period(&trace).unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-7);
    }

    #[test]
    fn van_der_pol_spirals_inward_outside_cycle() {
        let trace = simulate(&sys("(1-x^2)*v - x"), 2.5, 0.0, 30.0, 1e-10).unwrap();
        let (_, a) = measure_period(&trace).unwrap();
        assert!(a < 2.5);
    }

    #[test]
    fn energy_conserved_for_conservative_f() {
        // E = v²/2 + x²/2 + x⁴/4 for the Duffing force -x - x³
        let trace = simulate(&sys("-x-x^3"), 1.0, 0.0, 50.0, 1e-10).unwrap();
        let energy =
            |s: &Sample| 0.5 * s.v * s.v + 0.5 * s.x * s.x + 0.25 * s.x * s.x * s.x * s.x;
        let e0 = energy(&trace.samples[0]);
        for s in &trace.samples {
            assert!((energy(s) - e0).abs() <= 1e-7 * e0.abs().max(1.0));
        }
    }

    #[test]
    fn harmonic_isochrony() {
        let mut periods = Vec::new();
        for a in [0.1, 1.0, 10.0] {
            let trace = simulate(&sys("-x"), a, 0.0, 10.0, 1e-10).unwrap();
            periods.push(measure_period(&trace).unwrap().0);
        }
        for t in &periods {
            assert_relative_eq!(*t, 2.0 * PI, epsilon = 1e-8);
        }
    }

    #[test]
    fn event_x_matches_interpolated_trajectory() {
        let trace = simulate(&sys("-x"), 1.0, 0.0, 10.0, 1e-10).unwrap();
        for e in trace.events.iter().skip(1) {
            // analytic: x(t) = cos t, events at multiples of pi
            assert_relative_eq!(e.x.abs(), 1.0, epsilon = 1e-8);
        }
        // strictly increasing times
        for w in trace.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn steady_amplitude_harmonic_is_initial() {
        let (a, t) = steady_amplitude(&sys("-x"), 1.0, 1e-7).unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-6);
        assert_relative_eq!(t, 2.0 * PI, epsilon = 1e-6);
    }

    #[test]
    fn steady_amplitude_rejects_decay() {
        assert!(matches!(
            steady_amplitude(&sys("-x - 0.1*v"), 1.0, 1e-7),
            Err(Error::NoPeriodicAttractor)
        ));
    }

    #[test]
    fn steady_amplitude_van_der_pol() {
        let (a, _t) = steady_amplitude(&sys("(1-x^2)*v - x"), 0.5, 1e-8).unwrap();
        assert!(a > 1.5 && a < 2.5, "a = {a}");
    }

    #[test]
    fn el_residual_worked_examples() {
        assert_relative_eq!(el_residual(&sys("-x"), 0.3, 0.7).unwrap(), -1.0);
        assert_relative_eq!(el_residual(&sys("v"), 2.0, -1.0).unwrap(), 0.0);
        assert_relative_eq!(el_residual(&sys("-x*(1+v^2)"), 1.0, 0.0).unwrap(), 1.0);
    }
}
