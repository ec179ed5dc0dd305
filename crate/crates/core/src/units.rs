//! Unit conventions and the de Broglie wavenumber mapping.
//!
//! All lengths are expressed in units of the launch waist `w0`. The
//! electromagnetic convention fixes `c = 1`; the matter-wave conventions fix
//! `ħ = 1` and the (rest) mass to 1, leaving `c` free in the relativistic
//! case so that the nonrelativistic limit `p0/(m0 c) → 0` can be dialed in.

use crate::error::{Error, Result};
use crate::scenario::SystemKind;
use serde::{Deserialize, Serialize};

/// Which normalization family a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitsMode {
    Em,
    Quantum,
    Relativistic,
}

/// Normalization constants for one run. A bundle carries exactly one
/// `Units`; mixing modes within a run is rejected at scenario validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub mode: UnitsMode,
    /// Reduced Planck constant. 1 in matter-wave modes; unused (1) in EM.
    pub hbar: f64,
    /// Speed of light. 1 in EM mode; configurable in relativistic modes.
    pub light_speed: f64,
    /// Particle mass (quantum) or rest mass (relativistic). Unused in EM;
    /// zero for massless relativistic runs.
    pub mass: f64,
}

impl Units {
    pub fn em() -> Self {
        Units {
            mode: UnitsMode::Em,
            hbar: 1.0,
            light_speed: 1.0,
            mass: 0.0,
        }
    }

    pub fn quantum() -> Self {
        Units {
            mode: UnitsMode::Quantum,
            hbar: 1.0,
            light_speed: 1.0,
            mass: 1.0,
        }
    }

    pub fn relativistic(light_speed: f64, rest_mass: f64) -> Self {
        Units {
            mode: UnitsMode::Relativistic,
            hbar: 1.0,
            light_speed,
            mass: rest_mass,
        }
    }
}

/// Squared effective wavenumber of the matter wave associated with a
/// particle of total energy `energy` in potential `potential`.
///
/// Quantum: `2m(E - V)/ħ²`. Relativistic: `[(E - V)/ħc]² - (m0 c/ħ)²`.
/// Massless: `[(E - V)/ħc]²`, i.e. `(ω n/c)²` with `n = 1 - V/E`.
///
/// A negative result means the point is classically forbidden and is
/// reported as an evanescent-region error.
pub fn de_broglie_wavenumber_sq(
    energy: f64,
    potential: f64,
    rest_mass: f64,
    system: SystemKind,
    units: &Units,
) -> Result<f64> {
    let hbar = units.hbar;
    let c = units.light_speed;
    let k_sq = match system {
        SystemKind::Quantum => 2.0 * units.mass * (energy - potential) / (hbar * hbar),
        SystemKind::Relativistic => {
            let kin = (energy - potential) / (hbar * c);
            let rest = rest_mass * c / hbar;
            kin * kin - rest * rest
        }
        SystemKind::Massless => {
            let kin = (energy - potential) / (hbar * c);
            kin * kin
        }
        SystemKind::Em => {
            return Err(Error::config(
                "de Broglie mapping is defined for matter-wave systems, not EM",
            ))
        }
    };
    if k_sq < 0.0 {
        return Err(Error::Evanescent(format!(
            "squared wavenumber {k_sq:.6e} < 0 at E={energy:.6e}, V={potential:.6e}"
        )));
    }
    Ok(k_sq)
}
