use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("domain error in `{node}`: {message}")]
    Domain { node: String, message: String },

    #[error("no oscillation: orbit does not depart into real phase space (a = {a})")]
    NoOscillation { a: f64 },

    #[error("branch did not return to a turning point before a guard tripped ({reason})")]
    NonReturning { reason: String },

    #[error("solution blow-up: {what} exceeded guard at x = {x}")]
    BlowUp { what: String, x: f64 },

    #[error("step size underflow at {at}")]
    StepUnderflow { at: f64 },

    #[error("no sign change of the closure defect over [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("closure defect is zero across the whole bracket; every amplitude is periodic")]
    ConservativeFamily,

    #[error("f2 vanishes or changes sign at {at}")]
    F2Zero { at: f64 },

    #[error("target value {target} outside the range of the velocity integral")]
    OutOfRange { target: f64 },

    #[error("quadrature failed to converge (level cap {levels}, last delta {delta:e})")]
    QuadratureNonConvergence { levels: usize, delta: f64 },

    #[error("integrand is not finite at interior point {x}")]
    NonFiniteIntegrand { x: f64 },

    #[error("phase velocity not positive at interior point {x}")]
    NonPositivePhi { x: f64 },

    #[error("orbit is not closed (defect {defect:e}); refusing to compute a period")]
    NotClosed { defect: f64 },

    #[error("interpolation requested at x = {x} outside the stored branch [{lo}, {hi}]")]
    InterpolationGap { x: f64, lo: f64, hi: f64 },

    #[error("trace contains too few velocity-zero events ({found}, need {need})")]
    InsufficientEvents { found: usize, need: usize },

    #[error("no periodic attractor: event amplitudes decayed below the detection floor")]
    NoPeriodicAttractor,

    #[error("envelope did not settle within the maximum simulated time {t_max}")]
    NoConvergence { t_max: f64 },

    #[error("unknown catalog entry `{name}`")]
    UnknownCatalogEntry { name: String },

    #[error("invalid parameter `{name}` for catalog entry `{entry}`: {message}")]
    InvalidParameter {
        name: String,
        entry: String,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
