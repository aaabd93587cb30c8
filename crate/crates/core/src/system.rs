//! The oscillator right-hand side f(x, v), optionally with a separable
//! factorization f(x, v) = f1(x) * f2(v).

use crate::error::Result;
use crate::expr::{BinaryOp, EvalResult, Expr};
use crate::separable::SeparableSystem;

#[derive(Debug, Clone)]
pub struct OscillatorSystem {
    f: Expr,
    separable: Option<SeparableSystem>,
    /// Human-readable descriptor for reports.
    descriptor: String,
}

impl OscillatorSystem {
    pub fn from_expr(f: Expr) -> Self {
        let descriptor = f.to_string();
        OscillatorSystem {
            f,
            separable: None,
            descriptor,
        }
    }

    pub fn parse(source: &str) -> Result<Self> {
        Ok(Self::from_expr(Expr::parse(source)?))
    }

    /// Build from a separable pair; f is the product f1 * f2.
    pub fn from_separable(sep: SeparableSystem) -> Self {
        let f = Expr::Binary(
            BinaryOp::Mul,
            Box::new(sep.f1().clone()),
            Box::new(sep.f2().clone()),
        );
        let descriptor = f.to_string();
        OscillatorSystem {
            f,
            separable: Some(sep),
            descriptor,
        }
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn as_separable(&self) -> Option<&SeparableSystem> {
        self.separable.as_ref()
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// f(x, v), value only.
    pub fn eval(&self, x: f64, v: f64) -> Result<f64> {
        self.f.eval(x, v)
    }

    /// f(x, v) with all first and second partials.
    pub fn eval_full(&self, x: f64, v: f64) -> Result<EvalResult> {
        self.f.eval_full(x, v)
    }

    /// True when f has no velocity dependence (conservative oscillator).
    pub fn is_conservative(&self) -> bool {
        !self.f.uses(crate::expr::Var::V)
    }
}
