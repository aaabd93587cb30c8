//! Second-order forward-mode dual numbers over the two variables (x, v).
//!
//! Carries the value, both first partials and the three distinct second
//! partials through every arithmetic operation, so derivatives are exact
//! to rounding rather than finite-differenced.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2 {
    pub val: f64,
    pub dx: f64,
    pub dv: f64,
    pub dxx: f64,
    pub dxv: f64,
    pub dvv: f64,
}

impl Dual2 {
    pub const fn constant(c: f64) -> Self {
        Dual2 {
            val: c,
            dx: 0.0,
            dv: 0.0,
            dxx: 0.0,
            dxv: 0.0,
            dvv: 0.0,
        }
    }

    /// Seed for the position variable x.
    pub const fn var_x(x: f64) -> Self {
        Dual2 {
            val: x,
            dx: 1.0,
            dv: 0.0,
            dxx: 0.0,
            dxv: 0.0,
            dvv: 0.0,
        }
    }

    /// Seed for the velocity variable v.
    pub const fn var_v(v: f64) -> Self {
        Dual2 {
            val: v,
            dx: 0.0,
            dv: 1.0,
            dxx: 0.0,
            dxv: 0.0,
            dvv: 0.0,
        }
    }

    /// Lift a scalar function with known first and second derivative
    /// through the chain rule.
    fn lift(self, f: f64, f1: f64, f2: f64) -> Self {
        Dual2 {
            val: f,
            dx: f1 * self.dx,
            dv: f1 * self.dv,
            dxx: f2 * self.dx * self.dx + f1 * self.dxx,
            dxv: f2 * self.dx * self.dv + f1 * self.dxv,
            dvv: f2 * self.dv * self.dv + f1 * self.dvv,
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.lift(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.lift(c, -s, -c)
    }

    pub fn tan(self) -> Self {
        let t = self.val.tan();
        let sec2 = 1.0 + t * t;
        self.lift(t, sec2, 2.0 * t * sec2)
    }

    pub fn exp(self) -> Self {
        let e = self.val.exp();
        self.lift(e, e, e)
    }

    pub fn ln(self) -> Self {
        let inv = 1.0 / self.val;
        self.lift(self.val.ln(), inv, -inv * inv)
    }

    pub fn sqrt(self) -> Self {
        let r = self.val.sqrt();
        let d1 = 0.5 / r;
        self.lift(r, d1, -0.25 / (r * r * r))
    }

    pub fn tanh(self) -> Self {
        let t = self.val.tanh();
        let sech2 = 1.0 - t * t;
        self.lift(t, sech2, -2.0 * t * sech2)
    }

    /// |u|; the kink at 0 is resolved with sign(0) = 0.
    pub fn abs(self) -> Self {
        let s = if self.val > 0.0 {
            1.0
        } else if self.val < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.lift(self.val.abs(), s, 0.0)
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.val;
        self.lift(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    /// Integer power by repeated multiplication, so negative bases work.
    pub fn powi(self, n: i64) -> Self {
        if n == 0 {
            return Dual2::constant(1.0);
        }
        let (mut base, mut n_abs) = (self, n.unsigned_abs());
        let mut acc = Dual2::constant(1.0);
        while n_abs > 0 {
            if n_abs & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n_abs >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// General power through exp(b ln a); requires a > 0.
    pub fn pow(self, rhs: Self) -> Self {
        (rhs * self.ln()).exp()
    }
}

impl Add for Dual2 {
    type Output = Dual2;
    fn add(self, r: Dual2) -> Dual2 {
        Dual2 {
            val: self.val + r.val,
            dx: self.dx + r.dx,
            dv: self.dv + r.dv,
            dxx: self.dxx + r.dxx,
            dxv: self.dxv + r.dxv,
            dvv: self.dvv + r.dvv,
        }
    }
}

impl Sub for Dual2 {
    type Output = Dual2;
    fn sub(self, r: Dual2) -> Dual2 {
        Dual2 {
            val: self.val - r.val,
            dx: self.dx - r.dx,
            dv: self.dv - r.dv,
            dxx: self.dxx - r.dxx,
            dxv: self.dxv - r.dxv,
            dvv: self.dvv - r.dvv,
        }
    }
}

impl Mul for Dual2 {
    type Output = Dual2;
    fn mul(self, r: Dual2) -> Dual2 {
        Dual2 {
            val: self.val * r.val,
            dx: self.dx * r.val + self.val * r.dx,
            dv: self.dv * r.val + self.val * r.dv,
            dxx: self.dxx * r.val + 2.0 * self.dx * r.dx + self.val * r.dxx,
            dxv: self.dxv * r.val + self.dx * r.dv + self.dv * r.dx + self.val * r.dxv,
            dvv: self.dvv * r.val + 2.0 * self.dv * r.dv + self.val * r.dvv,
        }
    }
}

impl Div for Dual2 {
    type Output = Dual2;
    fn div(self, r: Dual2) -> Dual2 {
        self * r.recip()
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        Dual2 {
            val: -self.val,
            dx: -self.dx,
            dv: -self.dv,
            dxx: -self.dxx,
            dxv: -self.dxv,
            dvv: -self.dvv,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_rule_second_order() {
        // g(x, v) = x^2 * v at (3, 2): g_xx = 2v = 4, g_xv = 2x = 6, g_vv = 0
        let g = Dual2::var_x(3.0).powi(2) * Dual2::var_v(2.0);
        assert_relative_eq!(g.val, 18.0);
        assert_relative_eq!(g.dx, 12.0);
        assert_relative_eq!(g.dv, 9.0);
        assert_relative_eq!(g.dxx, 4.0);
        assert_relative_eq!(g.dxv, 6.0);
        assert_relative_eq!(g.dvv, 0.0);
    }

    #[test]
    fn chain_rule_sin_of_square() {
        // g(x) = sin(x^2): g' = 2x cos(x^2), g'' = 2 cos(x^2) - 4x^2 sin(x^2)
        let x = 0.7_f64;
        let g = Dual2::var_x(x).powi(2).sin();
        assert_relative_eq!(g.val, (x * x).sin(), max_relative = 1e-15);
        assert_relative_eq!(g.dx, 2.0 * x * (x * x).cos(), max_relative = 1e-14);
        assert_relative_eq!(
            g.dxx,
            2.0 * (x * x).cos() - 4.0 * x * x * (x * x).sin(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn negative_base_integer_power() {
        let g = Dual2::var_x(-2.0).powi(3);
        assert_relative_eq!(g.val, -8.0);
        assert_relative_eq!(g.dx, 12.0);
        assert_relative_eq!(g.dxx, -12.0);
    }
}
