//! Embedded Dormand–Prince 5(4) stepper with dense output, generic over
//! the state dimension. Used both for the phase-plane branch ODE (N = 1)
//! and the time-domain oracle (N = 2).

use crate::error::{Error, Result};
use std::ops::ControlFlow;

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

// 5th-order minus 4th-order weights, applied to k for the error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// Continuous-extension weights (Hairer's dopri5).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Dense-output polynomial over one accepted step.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    /// Evaluate the 4th-order interpolant at t in [t0, t0 + h].
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.cont[0][i]
                + s * (self.cont[1][i]
                    + s1 * (self.cont[2][i]
                        + s * (self.cont[3][i] + s1 * self.cont[4][i])));
        }
        y
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub tol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

// Step-size controller limits.
const SAFETY: f64 = 0.9;
const GROW_MAX: f64 = 5.0;
const SHRINK_MIN: f64 = 0.1;

/// Integrate y' = f(t, y) from (t0, y0) with initial step h0 > 0.
///
/// `on_step` is called once per accepted step with the step interval, the
/// new state, its derivative, and a dense-output interpolant; returning
/// `ControlFlow::Break` stops the integration.
pub fn integrate<const N: usize, F, S>(
    f: F,
    t0: f64,
    y0: [f64; N],
    h0: f64,
    ctrl: &StepControl,
    mut on_step: S,
) -> Result<()>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    S: FnMut(f64, f64, &[f64; N], &[f64; N], &DenseStep<N>) -> Result<ControlFlow<()>>,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = h0.min(ctrl.h_max);
    let mut k1 = f(t, &y)?;

    for _ in 0..ctrl.max_steps {
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { at: t });
        }

        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        let mut failed_eval = false;
        for stage in 0..6 {
            let mut ys = y;
            for i in 0..N {
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    ys[i] += h * A[stage][j] * kj[i];
                }
            }
            match f(t + C[stage] * h, &ys) {
                Ok(ki) => k[stage + 1] = ki,
                Err(_) if h > 1e-13 * t.abs().max(1.0) => {
                    // Domain error mid-step: retry with a smaller step.
                    failed_eval = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if failed_eval {
            h *= 0.25;
            continue;
        }

        // k[6] is f at (t + h, y_new) by construction of the last A row.
        let mut y_new = y;
        for i in 0..N {
            for (j, kj) in k.iter().enumerate().take(6) {
                y_new[i] += h * A[5][j] * kj[i];
            }
        }

        let mut err_sq = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let scale = ctrl.tol * (1.0 + y[i].abs().max(y_new[i].abs()));
            err_sq += (e / scale) * (e / scale);
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let dy = y_new[i] - y[i];
                cont[0][i] = y[i];
                cont[1][i] = dy;
                cont[2][i] = h * k[0][i] - dy;
                cont[3][i] = dy - h * k[6][i] - cont[2][i];
                let mut c5 = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    c5 += D[j] * kj[i];
                }
                cont[4][i] = h * c5;
            }
            let dense = DenseStep { t0: t, h, cont };
            let t_new = t + h;
            if on_step(t, t_new, &y_new, &k[6], &dense)?.is_break() {
                return Ok(());
            }
            t = t_new;
            y = y_new;
            k1 = k[6]; // FSAL
            let factor = if err == 0.0 {
                GROW_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(SHRINK_MIN, GROW_MAX)
            };
            h = (h * factor).min(ctrl.h_max);
        } else {
            h *= (SAFETY * err.powf(-0.2)).clamp(SHRINK_MIN, 1.0);
        }
    }
    Err(Error::NonReturning {
        reason: "step count guard (1e6 accepted steps)".into(),
    })
}
