//! Run configuration: which Hamiltonian system, medium, beam, and
//! integration controls.

use crate::beam::BeamProfile;
use crate::error::{Error, Result};
use crate::medium::{Medium, MediumKind};
use crate::units::{Units, UnitsMode};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The four trajectory systems. `Massless` is the zero-rest-mass limit of
/// `Relativistic` and integrates through the electromagnetic equations with
/// an energy-derived refractive index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Em,
    Quantum,
    Relativistic,
    Massless,
}

/// Time-stepping controls. When `dt` is absent a default is derived so that
/// a free ray advances at most a quarter of the initial ray spacing per
/// step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integration {
    pub dt: Option<f64>,
    pub n_steps: u64,
    pub snapshot_stride: u64,
}

/// How edge rays obtain their second-derivative estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeStencilPolicy {
    /// Copy the nearest interior Laplacian (default): edge tubes carry
    /// negligible flux and one-sided high-order stencils amplify noise.
    CopyInterior,
    /// One-sided 4-point second-derivative stencil.
    OneSided,
}

/// Regularization of the `∇²R/R` division near amplitude nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    /// Amplitudes below `amplitude_floor_rel · max(launch amplitude)` are
    /// clamped to that floor before dividing; clamp events are counted.
    pub amplitude_floor_rel: f64,
    pub edge_stencil: EdgeStencilPolicy,
}

impl Default for Regularization {
    fn default() -> Self {
        Regularization {
            amplitude_floor_rel: 1e-8,
            edge_stencil: EdgeStencilPolicy::CopyInterior,
        }
    }
}

/// Full description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub system: SystemKind,
    pub units: Units,
    pub medium: Medium,
    pub beam: BeamProfile,
    /// Vacuum wavelength in waist units; sets the launch momentum
    /// `p0 = 2πħ/λ0` and through it the nominal energy.
    pub lambda0: f64,
    pub integration: Integration,
    /// `false` switches the run to eikonal mode: the wave potential is
    /// forced to zero and the rays decouple.
    pub wave_potential_enabled: bool,
    pub regularization: Regularization,
}

impl Scenario {
    /// Launch momentum magnitude `p0 = 2πħ/λ0` (the stored EM "momentum" is
    /// the wave vector, so the same formula applies with ħ = 1).
    pub fn launch_momentum(&self) -> f64 {
        2.0 * PI * self.units.hbar / self.lambda0
    }

    /// Vacuum wavenumber `k0 = 2π/λ0`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.lambda0
    }

    /// Nominal conserved energy of the bundle: `ω` in EM mode, total
    /// particle energy otherwise. Potential offsets are referenced to the
    /// launch center (0, 0).
    pub fn energy(&self) -> f64 {
        let c = self.units.light_speed;
        let p0 = self.launch_momentum();
        let v0 = self.launch_center_potential();
        match self.system {
            SystemKind::Em => c * self.k0(),
            SystemKind::Quantum => p0 * p0 / (2.0 * self.units.mass) + v0,
            SystemKind::Relativistic => {
                let rest = self.units.mass * c * c;
                ((p0 * c).powi(2) + rest * rest).sqrt() + v0
            }
            SystemKind::Massless => p0 * c + v0,
        }
    }

    fn launch_center_potential(&self) -> f64 {
        if self.medium.kind == MediumKind::Potential {
            self.medium.eval(Vec2::ZERO).map(|(v, _)| v).unwrap_or(0.0)
        } else {
            0.0
        }
    }

    /// Launch speed along z of a free ray.
    pub fn launch_speed(&self) -> f64 {
        let c = self.units.light_speed;
        let p0 = self.launch_momentum();
        match self.system {
            SystemKind::Em | SystemKind::Massless => c,
            SystemKind::Quantum => p0 / self.units.mass,
            SystemKind::Relativistic => {
                c * c * p0 / (self.energy() - self.launch_center_potential())
            }
        }
    }

    /// Rayleigh length `π w0²/λ0` of the configured beam.
    pub fn rayleigh_length(&self) -> f64 {
        let w0 = self.beam.waist();
        PI * w0 * w0 / self.lambda0
    }

    /// Uniform launch grid spacing.
    pub fn launch_grid_spacing(&self) -> f64 {
        2.0 * self.beam.span / (self.beam.ray_count as f64 - 1.0)
    }

    /// Effective time step: the configured one, or the default rule that a
    /// free ray advances at most a quarter of the initial ray spacing.
    pub fn dt(&self) -> f64 {
        self.integration
            .dt
            .unwrap_or_else(|| 0.25 * self.launch_grid_spacing() / self.launch_speed())
    }

    /// Absolute amplitude clamp floor for a given launch peak.
    pub fn amplitude_floor(&self, max_launch_amplitude: f64) -> f64 {
        self.regularization.amplitude_floor_rel * max_launch_amplitude
    }

    pub fn validate(&self) -> Result<()> {
        self.beam.validate()?;
        self.medium.validate()?;
        if !(self.lambda0 > 0.0) {
            return Err(Error::config(format!(
                "lambda0 must be positive, got {}",
                self.lambda0
            )));
        }
        if let Some(dt) = self.integration.dt {
            if !(dt > 0.0) {
                return Err(Error::config(format!("dt must be positive, got {dt}")));
            }
        }
        if self.integration.snapshot_stride == 0 {
            return Err(Error::config("snapshot_stride must be at least 1"));
        }
        if !(self.regularization.amplitude_floor_rel > 0.0)
            || self.regularization.amplitude_floor_rel >= 1.0
        {
            return Err(Error::config(
                "amplitude_floor_rel must lie strictly between 0 and 1",
            ));
        }

        // One Units instance per run, and it must match the system.
        let expected_mode = match self.system {
            SystemKind::Em => UnitsMode::Em,
            SystemKind::Quantum => UnitsMode::Quantum,
            SystemKind::Relativistic | SystemKind::Massless => UnitsMode::Relativistic,
        };
        if self.units.mode != expected_mode {
            return Err(Error::config(format!(
                "units mode {:?} does not match system {:?}",
                self.units.mode, self.system
            )));
        }
        if !(self.units.hbar > 0.0) || !(self.units.light_speed > 0.0) {
            return Err(Error::config("hbar and light_speed must be positive"));
        }
        match self.system {
            SystemKind::Quantum | SystemKind::Relativistic => {
                if !(self.units.mass > 0.0) {
                    return Err(Error::config("mass must be positive for this system"));
                }
            }
            SystemKind::Massless => {
                if self.units.mass != 0.0 {
                    return Err(Error::config("massless runs require zero rest mass"));
                }
            }
            SystemKind::Em => {}
        }

        // Field kind must match the system family.
        let expected_kind = match self.system {
            SystemKind::Em => MediumKind::Index,
            _ => MediumKind::Potential,
        };
        if self.medium.kind != expected_kind {
            return Err(Error::config(format!(
                "system {:?} requires a {:?} medium, got {:?}",
                self.system, expected_kind, self.medium.kind
            )));
        }

        // Launch line must be inside the medium and classically allowed.
        let energy = self.energy();
        let rest_energy = self.units.mass * self.units.light_speed.powi(2);
        let n = self.beam.ray_count;
        let spacing = self.launch_grid_spacing();
        for j in 0..n {
            let x = -self.beam.span + spacing * j as f64;
            let (value, _) = self.medium.eval(Vec2::new(x, 0.0))?;
            match self.system {
                SystemKind::Quantum => {
                    if energy - value <= 0.0 {
                        return Err(Error::config(format!(
                            "E - V = {:.6e} <= 0 at launch x = {x}",
                            energy - value
                        )));
                    }
                }
                SystemKind::Relativistic => {
                    if energy - value <= rest_energy {
                        return Err(Error::config(format!(
                            "E - V = {:.6e} does not exceed rest energy at launch x = {x}",
                            energy - value
                        )));
                    }
                }
                SystemKind::Massless => {
                    if energy - value <= 0.0 {
                        return Err(Error::config(format!(
                            "E - V = {:.6e} <= 0 at launch x = {x}",
                            energy - value
                        )));
                    }
                }
                SystemKind::Em => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quantum_gaussian() -> Scenario {
        Scenario {
            system: SystemKind::Quantum,
            units: Units::quantum(),
            medium: Medium::free(),
            beam: BeamProfile::gaussian(1.0, 3.0, 11),
            lambda0: 2e-4,
            integration: Integration {
                dt: None,
                n_steps: 10,
                snapshot_stride: 1,
            },
            wave_potential_enabled: true,
            regularization: Regularization::default(),
        }
    }

    #[test]
    fn quantum_energy_is_kinetic() {
        let s = quantum_gaussian();
        let p0 = s.launch_momentum();
        assert_eq!(s.energy(), p0 * p0 / 2.0);
    }

    #[test]
    fn default_dt_is_quarter_spacing_over_speed() {
        let s = quantum_gaussian();
        let expected = 0.25 * (6.0 / 10.0) / s.launch_speed();
        assert_eq!(s.dt(), expected);
    }

    #[test]
    fn mixed_units_rejected() {
        let mut s = quantum_gaussian();
        s.units = Units::em();
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn index_medium_rejected_for_quantum() {
        let mut s = quantum_gaussian();
        s.medium = Medium::vacuum();
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn forbidden_launch_rejected() {
        let mut s = quantum_gaussian();
        // A potential wall higher than the kinetic energy at the launch edge.
        let e = s.energy();
        s.medium = Medium::harmonic_potential(e);
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }
}
