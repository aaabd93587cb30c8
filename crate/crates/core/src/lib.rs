//! Phase-plane reduction of second-order oscillators ẍ = f(x, ẋ).
//!
//! The pipeline: parse f, integrate the first-integral branch equation
//! du/dx = 2 f(x, σ√u) away from a turning point, discriminate periodic
//! orbits by the closure defect of the branch pair, and compute periods
//! by singular quadrature, everything cross-checked against direct
//! time-domain simulation.

pub mod catalog;
pub mod error;
pub mod expr;
pub mod numeric;
pub mod oracle;
pub mod period;
pub mod reduction;
pub mod rk;
pub mod separable;
pub mod system;

pub use error::{Error, Result};
pub use expr::{EvalResult, Expr};
pub use oracle::OrbitTrace;
pub use period::{PeriodEstimate, PeriodMethod};
pub use reduction::{BranchProfile, BranchSpec, ClosureReport, Verdict};
pub use separable::SeparableSystem;
pub use system::OscillatorSystem;
