//! Built-in named oscillators with reference data for tests and demos.

use crate::error::{Error, Result};
use crate::separable::SeparableSystem;
use crate::system::OscillatorSystem;

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
}

pub const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "harmonic",
        summary: "ẍ = -x; isochronous, period 2π at every amplitude",
        params: &[],
    },
    CatalogEntry {
        name: "mickens",
        summary: "ẍ = -x(1+ẋ^s); separable, closed orbits for even s",
        params: &[ParamSpec {
            name: "s",
            default: 2.0,
        }],
    },
    CatalogEntry {
        name: "duffing",
        summary: "ẍ = -x - eps·x³; conservative hardening spring",
        params: &[ParamSpec {
            name: "eps",
            default: 1.0,
        }],
    },
    CatalogEntry {
        name: "vanderpol",
        summary: "ẍ = mu(1-x²)ẋ - x; isolated limit cycle",
        params: &[ParamSpec {
            name: "mu",
            default: 1.0,
        }],
    },
    CatalogEntry {
        name: "damped-linear",
        summary: "ẍ = -x - c·ẋ; decays, no periodic orbit",
        params: &[ParamSpec {
            name: "c",
            default: 0.1,
        }],
    },
];

fn lookup(entry: &CatalogEntry, overrides: &[(String, f64)], key: &str) -> Result<f64> {
    for (name, _) in overrides {
        if !entry.params.iter().any(|p| p.name == name) {
            return Err(Error::InvalidParameter {
                name: name.clone(),
                entry: entry.name.into(),
                message: "no such parameter".into(),
            });
        }
    }
    let spec = entry
        .params
        .iter()
        .find(|p| p.name == key)
        .expect("parameter key known to the entry");
    Ok(overrides
        .iter()
        .find(|(n, _)| n == key)
        .map(|(_, v)| *v)
        .unwrap_or(spec.default))
}

/// Instantiate a catalog system by name with parameter overrides.
pub fn get(name: &str, overrides: &[(String, f64)]) -> Result<OscillatorSystem> {
    let entry = ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownCatalogEntry { name: name.into() })?;
    match name {
        "harmonic" => Ok(OscillatorSystem::from_separable(SeparableSystem::parse(
            "-x", "1",
        )?)),
        "mickens" => {
            let s = lookup(entry, overrides, "s")?;
            if s.fract() != 0.0 || s < 1.0 {
                return Err(Error::InvalidParameter {
                    name: "s".into(),
                    entry: "mickens".into(),
                    message: "exponent must be a positive integer".into(),
                });
            }
            // Odd s breaks the v-parity symmetry of the orbit; accepted,
            // but the closure test rather than the symmetric formula is
            // the trustworthy path there.
            let s = s as i64;
            Ok(OscillatorSystem::from_separable(SeparableSystem::parse(
                "-x",
                &format!("1+v^{s}"),
            )?))
        }
        "duffing" => {
            let eps = lookup(entry, overrides, "eps")?;
            Ok(OscillatorSystem::from_separable(SeparableSystem::parse(
                &format!("-x-{eps}*x^3"),
                "1",
            )?))
        }
        "vanderpol" => {
            let mu = lookup(entry, overrides, "mu")?;
            OscillatorSystem::parse(&format!("{mu}*(1-x^2)*v - x"))
        }
        "damped-linear" => {
            let c = lookup(entry, overrides, "c")?;
            OscillatorSystem::parse(&format!("-x - {c}*v"))
        }
        _ => unreachable!(),
    }
}

/// Reference facts for the catalog systems, each with its recomputation
/// recipe stated where it is defined.
pub mod reference {
    /// Harmonic: u(x) = A² − x², from the energy integral u = 2∫ₓᴬ s ds.
    pub fn harmonic_u(amplitude: f64, x: f64) -> f64 {
        amplitude * amplitude - x * x
    }

    /// Mickens s = 2: u(x) = e^{A²−x²} − 1, from integrating
    /// du/dx = −2x(1+u).
    pub fn mickens_u(amplitude: f64, x: f64) -> f64 {
        (amplitude * amplitude - x * x).exp() - 1.0
    }

    /// Duffing eps = 1: u(x) = (A²−x²) + (A⁴−x⁴)/2, from the energy
    /// integral u = 2∫ₓᴬ (s + s³) ds.
    pub fn duffing_u(amplitude: f64, x: f64) -> f64 {
        let (a2, x2) = (amplitude * amplitude, x * x);
        (a2 - x2) + (a2 * a2 - x2 * x2) / 2.0
    }

    /// Van der Pol mu = 1 limit-cycle amplitude (x at the ẋ = 0 section).
    /// Measured fixture: recompute with `oracle::steady_amplitude` from
    /// x0 = 0.5 at tolerance 1e-9.
    pub const VAN_DER_POL_MU1_AMPLITUDE: f64 = 2.0086198608107706;

    /// Van der Pol mu = 1 limit-cycle period; same recomputation recipe
    /// as the amplitude fixture.
    pub const VAN_DER_POL_MU1_PERIOD: f64 = 6.6632868592071475;
}
