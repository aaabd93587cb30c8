//! Separable oscillators ẍ = f1(x) · f2(ẋ): the phase-plane velocity
//! follows from equating the velocity-side integral
//! G(p) = ∫₀ᵖ s / f2(s) ds with the force-side integral
//! F(A, x) = ∫_A^x f1(s) ds, then inverting G.

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::numeric::{adaptive_simpson, bracket_root};

/// Quadrature tolerance for both integrals.
const QUAD_TOL: f64 = 1e-12;
/// Relative tolerance for the inversion root-find.
const INVERT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SeparableSystem {
    f1: Expr,
    f2: Expr,
}

impl SeparableSystem {
    /// f1 may mention only x, f2 only v.
    pub fn new(f1: Expr, f2: Expr) -> Result<Self> {
        if f1.uses(Var::V) {
            return Err(Error::Domain {
                node: "f1".into(),
                message: "position factor must not mention v".into(),
            });
        }
        if f2.uses(Var::X) {
            return Err(Error::Domain {
                node: "f2".into(),
                message: "velocity factor must not mention x".into(),
            });
        }
        Ok(SeparableSystem { f1, f2 })
    }

    pub fn parse(f1: &str, f2: &str) -> Result<Self> {
        Self::new(Expr::parse(f1)?, Expr::parse(f2)?)
    }

    pub fn f1(&self) -> &Expr {
        &self.f1
    }

    pub fn f2(&self) -> &Expr {
        &self.f2
    }

    /// G(p) = ∫₀ᵖ s / f2(s) ds.
    ///
    /// Errors if f2 vanishes or changes sign over [0, p].
    pub fn velocity_integral(&self, p: f64) -> Result<f64> {
        if p == 0.0 {
            return Ok(0.0);
        }
        let f2_at_zero = self.f2.eval(0.0, 0.0)?;
        if f2_at_zero == 0.0 {
            return Err(Error::F2Zero { at: 0.0 });
        }
        let sign = f2_at_zero.signum();
        let integrand = |s: f64| -> Result<f64> {
            let f2 = self.f2.eval(0.0, s)?;
            if f2 == 0.0 || f2.signum() != sign {
                return Err(Error::F2Zero { at: s });
            }
            Ok(s / f2)
        };
        adaptive_simpson(&integrand, 0.0, p, QUAD_TOL)
    }

    /// F(A, x) = ∫_A^x f1(s) ds, signed.
    pub fn force_integral(&self, amplitude: f64, x: f64) -> Result<f64> {
        if x == amplitude {
            return Ok(0.0);
        }
        let integrand = |s: f64| self.f1.eval(s, 0.0);
        adaptive_simpson(&integrand, amplitude, x, QUAD_TOL)
    }

    /// F at a signed offset below the amplitude, integrated in offset
    /// space: F(A, A − dist) = −∫₀^dist f1(A − ξ) dξ. Near the turning
    /// point this keeps full relative precision in the shrinking
    /// integration interval, where `force_integral(A, A - dist)` would
    /// quantize its width to the ulp of the abscissa.
    pub fn force_integral_at(&self, amplitude: f64, dist: f64) -> Result<f64> {
        if dist == 0.0 {
            return Ok(0.0);
        }
        let integrand = |xi: f64| self.f1.eval(amplitude - xi, 0.0);
        Ok(-adaptive_simpson(&integrand, 0.0, dist, QUAD_TOL)?)
    }

    /// The nonnegative phase-plane speed φ(x) solving G(φ) = F(A, x).
    pub fn phase_speed(&self, amplitude: f64, x: f64) -> Result<f64> {
        if x == amplitude {
            return Ok(0.0);
        }
        self.invert_speed(self.force_integral(amplitude, x)?)
    }

    /// φ at a distance `dist` below the amplitude, via
    /// [`Self::force_integral_at`].
    pub fn phase_speed_at(&self, amplitude: f64, dist: f64) -> Result<f64> {
        if dist == 0.0 {
            return Ok(0.0);
        }
        self.invert_speed(self.force_integral_at(amplitude, dist)?)
    }

    fn invert_speed(&self, target: f64) -> Result<f64> {
        if target == 0.0 {
            return Ok(0.0);
        }
        let g_sign = self.f2.eval(0.0, 0.0)?.signum();
        // G is strictly monotone with the sign of f2; the target must lie
        // on that side of zero for a real speed to exist.
        if target.signum() != g_sign {
            return Err(Error::OutOfRange { target });
        }

        // Expand the bracket until |G| passes |target|; stop early if f2
        // runs out of its one-signed range.
        let mut hi = 1e-3;
        let mut g_hi = self.velocity_integral(hi)?;
        let mut doublings = 0;
        while g_hi.abs() < target.abs() {
            hi *= 2.0;
            doublings += 1;
            if doublings > 60 {
                return Err(Error::OutOfRange { target });
            }
            match self.velocity_integral(hi) {
                Ok(g) => g_hi = g,
                Err(Error::F2Zero { .. }) => return Err(Error::OutOfRange { target }),
                Err(e) => return Err(e),
            }
        }

        bracket_root(
            |p| Ok(self.velocity_integral(p)? - target),
            0.0,
            hi,
            INVERT_TOL,
            0.0,
        )
    }
}
