//! Refractive-index and potential-energy fields with analytic gradients.

use crate::error::{Error, Result};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Whether the field is a refractive index `n(x, z)` or a potential energy
/// `V(x, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MediumKind {
    Index,
    Potential,
}

/// Rectangular validity box. Queries outside it are out-of-domain errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl DomainBox {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.z >= self.z_min && p.z <= self.z_max
    }
}

/// Spatial form of the field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum MediumField {
    Uniform { value: f64 },
    /// `value = floor + stiffness/2 · (x - center)²`, independent of z.
    HarmonicX {
        floor: f64,
        stiffness: f64,
        center: f64,
    },
    /// Bilinear interpolation on a regular grid over the implied box
    /// `[x0, x0 + dx·(nx-1)] × [z0, z0 + dz·(nz-1)]`. `values` is row-major
    /// with x varying fastest.
    Tabulated {
        x0: f64,
        z0: f64,
        dx: f64,
        dz: f64,
        nx: usize,
        nz: usize,
        values: Vec<f64>,
    },
}

/// A medium: field kind, spatial form, and optional validity box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub kind: MediumKind,
    pub field: MediumField,
    pub domain: Option<DomainBox>,
}

impl Medium {
    /// Vacuum: uniform index 1.
    pub fn vacuum() -> Self {
        Medium {
            kind: MediumKind::Index,
            field: MediumField::Uniform { value: 1.0 },
            domain: None,
        }
    }

    /// Force-free potential: uniform V = 0.
    pub fn free() -> Self {
        Medium {
            kind: MediumKind::Potential,
            field: MediumField::Uniform { value: 0.0 },
            domain: None,
        }
    }

    pub fn harmonic_potential(stiffness: f64) -> Self {
        Medium {
            kind: MediumKind::Potential,
            field: MediumField::HarmonicX {
                floor: 0.0,
                stiffness,
                center: 0.0,
            },
            domain: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.field {
            MediumField::Uniform { value } => {
                if self.kind == MediumKind::Index && !(*value > 0.0) {
                    return Err(Error::config(format!(
                        "refractive index must be positive, got {value}"
                    )));
                }
            }
            MediumField::HarmonicX { stiffness, .. } => {
                if !stiffness.is_finite() {
                    return Err(Error::config("harmonic stiffness must be finite"));
                }
            }
            MediumField::Tabulated {
                dx, dz, nx, nz, values, ..
            } => {
                if !(*dx > 0.0) || !(*dz > 0.0) {
                    return Err(Error::config("tabulated grid spacing must be positive"));
                }
                if *nx < 2 || *nz < 2 || values.len() != nx * nz {
                    return Err(Error::config(format!(
                        "tabulated field needs nx, nz >= 2 and {} values, got {}",
                        nx * nz,
                        values.len()
                    )));
                }
            }
        }
        if let Some(b) = &self.domain {
            if !(b.x_min < b.x_max) || !(b.z_min < b.z_max) {
                return Err(Error::config("domain box must have positive extent"));
            }
        }
        Ok(())
    }

    /// The box inside which the field may be queried. Tabulated fields are
    /// bounded by their grid even without an explicit domain box.
    fn effective_domain(&self) -> Option<DomainBox> {
        if self.domain.is_some() {
            return self.domain;
        }
        if let MediumField::Tabulated {
            x0, z0, dx, dz, nx, nz, ..
        } = &self.field
        {
            return Some(DomainBox {
                x_min: *x0,
                x_max: x0 + dx * (*nx as f64 - 1.0),
                z_min: *z0,
                z_max: z0 + dz * (*nz as f64 - 1.0),
            });
        }
        None
    }

    /// Field value and spatial gradient at `position`.
    pub fn eval(&self, position: Vec2) -> Result<(f64, Vec2)> {
        if let Some(b) = self.effective_domain() {
            if !b.contains(position) {
                return Err(Error::OutOfDomain {
                    x: position.x,
                    z: position.z,
                });
            }
        }
        let (value, grad) = match &self.field {
            MediumField::Uniform { value } => (*value, Vec2::ZERO),
            MediumField::HarmonicX {
                floor,
                stiffness,
                center,
            } => {
                let d = position.x - center;
                (
                    floor + 0.5 * stiffness * d * d,
                    Vec2::new(stiffness * d, 0.0),
                )
            }
            MediumField::Tabulated { .. } => self.eval_tabulated(position),
        };
        if self.kind == MediumKind::Index && !(value > 0.0) {
            return Err(Error::config(format!(
                "refractive index evaluated non-positive ({value}) at ({}, {})",
                position.x, position.z
            )));
        }
        Ok((value, grad))
    }

    fn eval_tabulated(&self, p: Vec2) -> (f64, Vec2) {
        let MediumField::Tabulated {
            x0, z0, dx, dz, nx, nz, values,
        } = &self.field
        else {
            unreachable!()
        };
        let at = |i: usize, j: usize| values[j * nx + i];
        // Cell indices, clamped so boundary queries stay valid.
        let fx = ((p.x - x0) / dx).clamp(0.0, *nx as f64 - 1.0);
        let fz = ((p.z - z0) / dz).clamp(0.0, *nz as f64 - 1.0);
        let i = (fx as usize).min(nx - 2);
        let j = (fz as usize).min(nz - 2);
        let tx = fx - i as f64;
        let tz = fz - j as f64;
        let v00 = at(i, j);
        let v10 = at(i + 1, j);
        let v01 = at(i, j + 1);
        let v11 = at(i + 1, j + 1);
        let value = v00 * (1.0 - tx) * (1.0 - tz)
            + v10 * tx * (1.0 - tz)
            + v01 * (1.0 - tx) * tz
            + v11 * tx * tz;
        let dvdx = ((v10 - v00) * (1.0 - tz) + (v11 - v01) * tz) / dx;
        let dvdz = ((v01 - v00) * (1.0 - tx) + (v11 - v10) * tx) / dz;
        (value, Vec2::new(dvdx, dvdz))
    }
}

/// Value and gradient of `medium` at `position`; the bare-function form of
/// [`Medium::eval`].
pub fn eval_medium(medium: &Medium, position: Vec2) -> Result<(f64, Vec2)> {
    medium.eval(position)
}
