//! Initial transverse amplitude profiles.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Minimum number of rays: interior second-difference stencils need three
/// points plus one ray on each edge.
pub const MIN_RAY_COUNT: usize = 5;

/// Functional form of the launch amplitude `R(x, z=0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    /// `exp(-x²/w0²)`.
    Gaussian { waist: f64 },
    /// `exp(-(x/w0)^(2m))`: a flat top with soft edges; `order = 1` reduces
    /// to the Gaussian.
    SuperGaussian { waist: f64, order: u32 },
    /// Amplitudes tabulated at the launch abscissas, one per ray.
    Table { amplitudes: Vec<f64> },
}

/// Launch beam description: profile shape, launch interval half-width, and
/// ray count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamProfile {
    pub kind: ProfileKind,
    /// Launch abscissas cover `[-span, +span]`.
    pub span: f64,
    pub ray_count: usize,
}

impl BeamProfile {
    pub fn gaussian(waist: f64, span: f64, ray_count: usize) -> Self {
        BeamProfile {
            kind: ProfileKind::Gaussian { waist },
            span,
            ray_count,
        }
    }

    pub fn super_gaussian(waist: f64, order: u32, span: f64, ray_count: usize) -> Self {
        BeamProfile {
            kind: ProfileKind::SuperGaussian { waist, order },
            span,
            ray_count,
        }
    }

    /// Nominal localization half-width of the profile (the waist, or the
    /// table's span).
    pub fn waist(&self) -> f64 {
        match &self.kind {
            ProfileKind::Gaussian { waist } | ProfileKind::SuperGaussian { waist, .. } => *waist,
            ProfileKind::Table { .. } => self.span,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.span > 0.0) {
            return Err(Error::config(format!(
                "beam span must be positive, got {}",
                self.span
            )));
        }
        if self.ray_count < MIN_RAY_COUNT {
            return Err(Error::config(format!(
                "ray_count must be at least {MIN_RAY_COUNT}, got {}",
                self.ray_count
            )));
        }
        match &self.kind {
            ProfileKind::Gaussian { waist } => {
                if !(*waist > 0.0) {
                    return Err(Error::config(format!(
                        "gaussian waist must be positive, got {waist}"
                    )));
                }
            }
            ProfileKind::SuperGaussian { waist, order } => {
                if !(*waist > 0.0) {
                    return Err(Error::config(format!(
                        "super-gaussian waist must be positive, got {waist}"
                    )));
                }
                if *order == 0 {
                    return Err(Error::config("super-gaussian order must be at least 1"));
                }
            }
            ProfileKind::Table { amplitudes } => {
                if amplitudes.len() != self.ray_count {
                    return Err(Error::config(format!(
                        "table profile has {} samples but ray_count is {} (insufficient stencil \
                         coverage unless they match)",
                        amplitudes.len(),
                        self.ray_count
                    )));
                }
                if amplitudes.iter().any(|a| !a.is_finite() || *a < 0.0) {
                    return Err(Error::config(
                        "table amplitudes must be finite and nonnegative",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Amplitude at launch abscissa `x` for analytic kinds; table profiles
    /// are indexed by ray instead (see [`BeamProfile::sample`]).
    pub fn amplitude_at(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Gaussian { waist } => (-(x / waist).powi(2)).exp(),
            ProfileKind::SuperGaussian { waist, order } => {
                (-(x / waist).powi(2 * *order as i32)).exp()
            }
            ProfileKind::Table { .. } => f64::NAN,
        }
    }

    /// Amplitude of ray `index` launched at abscissa `x`.
    pub fn sample(&self, index: usize, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Table { amplitudes } => amplitudes[index],
            _ => self.amplitude_at(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_matches_closed_form() {
        let p = BeamProfile::gaussian(1.0, 2.0, 5);
        for (x, expected) in [(0.0, 1.0), (1.0, (-1.0f64).exp()), (2.0, (-4.0f64).exp())] {
            assert_eq!(p.amplitude_at(x), expected);
            assert_eq!(p.amplitude_at(-x), expected);
        }
    }

    #[test]
    fn super_gaussian_order_one_is_gaussian() {
        let sg = BeamProfile::super_gaussian(1.3, 1, 2.0, 7);
        let g = BeamProfile::gaussian(1.3, 2.0, 7);
        for x in [-1.9, -0.4, 0.0, 0.7, 1.5] {
            assert_eq!(sg.amplitude_at(x), g.amplitude_at(x));
        }
    }

    #[test]
    fn short_table_is_rejected() {
        let p = BeamProfile {
            kind: ProfileKind::Table {
                amplitudes: vec![0.5, 1.0, 0.5],
            },
            span: 1.0,
            ray_count: 5,
        };
        assert!(matches!(p.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn too_few_rays_rejected() {
        let p = BeamProfile::gaussian(1.0, 2.0, 4);
        assert!(matches!(p.validate(), Err(Error::Config(_))));
    }
}
