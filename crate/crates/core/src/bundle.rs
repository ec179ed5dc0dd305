//! Ray states, bundles, and launch-time construction.

use crate::beam::BeamProfile;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// One trajectory's instantaneous state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayState {
    pub position: Vec2,
    /// Particle momentum; in EM mode this is the wave vector `k` (i.e. the
    /// momentum in units of ħ).
    pub momentum: Vec2,
    /// Transported wave amplitude `R ≥ 0`.
    pub amplitude: f64,
    /// Latest wave-potential sample along this ray (`W` in EM mode, `Q`
    /// otherwise).
    pub wave_potential: f64,
    /// Index of this ray at launch; ordering by launch index must match the
    /// transverse ordering at all times.
    pub launch_index: usize,
}

/// Per-ray reference values frozen at launch; the flux-conservation
/// transport is evaluated against these, so they are never mutated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaunchReference {
    pub spacings: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub momentum_magnitudes: Vec<f64>,
}

/// An ordered collection of rays sharing one wavefront.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    /// Rays ordered by launch transverse coordinate.
    pub rays: Vec<RayState>,
    pub launch: LaunchReference,
    pub time: f64,
    pub step_count: u64,
}

impl Bundle {
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    /// Largest launch amplitude; the clamp floor is relative to this.
    pub fn max_launch_amplitude(&self) -> f64 {
        self.launch.amplitudes.iter().copied().fold(0.0, f64::max)
    }
}

/// Voronoi spacings of a strictly increasing coordinate sequence: half the
/// distance between each point's two neighbors, one-sided at the edges.
pub(crate) fn voronoi_spacings(coords: &[f64]) -> Vec<f64> {
    let n = coords.len();
    let mut spacings = vec![0.0; n];
    spacings[0] = coords[1] - coords[0];
    spacings[n - 1] = coords[n - 1] - coords[n - 2];
    for j in 1..n - 1 {
        spacings[j] = 0.5 * (coords[j + 1] - coords[j - 1]);
    }
    spacings
}

/// Launch abscissas: uniform over `[-span, +span]`, constructed mirror
/// symmetrically so that `x[j] == -x[n-1-j]` holds exactly and the center
/// ray of an odd grid sits at exactly 0.
pub(crate) fn launch_abscissas(span: f64, n: usize) -> Vec<f64> {
    let spacing = 2.0 * span / (n as f64 - 1.0);
    (0..n)
        .map(|j| {
            let mirror = n - 1 - j;
            let magnitude = span - spacing * j.min(mirror) as f64;
            match j.cmp(&mirror) {
                std::cmp::Ordering::Less => -magnitude,
                std::cmp::Ordering::Equal => 0.0,
                std::cmp::Ordering::Greater => magnitude,
            }
        })
        .collect()
}

/// Place a bundle on the line z = 0: abscissas uniform over
/// `[-span, +span]`, momenta all `(0, p0)`, amplitudes sampled from the
/// profile, spacings per the Voronoi convention.
pub fn make_bundle(profile: &BeamProfile, scenario: &Scenario) -> Result<Bundle> {
    scenario.validate()?;
    profile.validate()?;
    let p0 = scenario.launch_momentum();
    if !(p0 > 0.0) {
        return Err(Error::config(format!(
            "launch momentum must be positive, got {p0}"
        )));
    }

    let n = profile.ray_count;
    let xs = launch_abscissas(profile.span, n);
    let mut rays = Vec::with_capacity(n);
    for (j, &x) in xs.iter().enumerate() {
        let amplitude = profile.sample(j, x);
        if !(amplitude >= 0.0) {
            return Err(Error::config(format!(
                "profile produced a negative amplitude at x = {x}"
            )));
        }
        rays.push(RayState {
            position: Vec2::new(x, 0.0),
            momentum: Vec2::new(0.0, p0),
            amplitude,
            wave_potential: 0.0,
            launch_index: j,
        });
    }

    let spacings = voronoi_spacings(&xs);
    let amplitudes = rays.iter().map(|r| r.amplitude).collect();
    let momentum_magnitudes = vec![p0; n];
    Ok(Bundle {
        rays,
        launch: LaunchReference {
            spacings,
            amplitudes,
            momentum_magnitudes,
        },
        time: 0.0,
        step_count: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::BeamProfile;
    use crate::medium::Medium;
    use crate::scenario::{Integration, Regularization, SystemKind};
    use crate::units::Units;

    fn scenario_with(beam: BeamProfile) -> Scenario {
        Scenario {
            system: SystemKind::Quantum,
            units: Units::quantum(),
            medium: Medium::free(),
            beam,
            lambda0: 2e-4,
            integration: Integration {
                dt: None,
                n_steps: 1,
                snapshot_stride: 1,
            },
            wave_potential_enabled: true,
            regularization: Regularization::default(),
        }
    }

    #[test]
    fn five_ray_gaussian_amplitudes() {
        let beam = BeamProfile::gaussian(1.0, 2.0, 5);
        let s = scenario_with(beam.clone());
        let b = make_bundle(&beam, &s).unwrap();
        let expected = [(-4.0f64).exp(), (-1.0f64).exp(), 1.0, (-1.0f64).exp(), (-4.0f64).exp()];
        for (ray, (x, amp)) in b
            .rays
            .iter()
            .zip([-2.0, -1.0, 0.0, 1.0, 2.0].iter().zip(expected.iter()))
        {
            assert_eq!(ray.position.x, *x);
            assert_eq!(ray.amplitude, *amp);
        }
    }

    #[test]
    fn launch_momenta_are_axial() {
        let beam = BeamProfile::super_gaussian(1.0, 4, 2.0, 9);
        let s = scenario_with(beam.clone());
        let b = make_bundle(&beam, &s).unwrap();
        let p0 = s.launch_momentum();
        for ray in &b.rays {
            assert_eq!(ray.momentum.x, 0.0);
            assert_eq!(ray.momentum.z, p0);
        }
    }

    #[test]
    fn voronoi_spacings_on_uniform_grid() {
        let beam = BeamProfile::gaussian(1.0, 2.0, 5);
        let s = scenario_with(beam.clone());
        let b = make_bundle(&beam, &s).unwrap();
        assert_eq!(b.launch.spacings, vec![1.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn table_shorter_than_ray_count_is_config_error() {
        let beam = BeamProfile {
            kind: crate::beam::ProfileKind::Table {
                amplitudes: vec![1.0, 2.0, 1.0],
            },
            span: 1.0,
            ray_count: 5,
        };
        let s = scenario_with(beam.clone());
        assert!(matches!(make_bundle(&beam, &s), Err(Error::Config(_))));
    }

    #[test]
    fn mirror_symmetry_of_symmetric_profiles() {
        for beam in [
            BeamProfile::gaussian(1.3, 2.5, 11),
            BeamProfile::super_gaussian(0.9, 4, 2.0, 15),
        ] {
            let s = scenario_with(beam.clone());
            let b = make_bundle(&beam, &s).unwrap();
            let n = b.len();
            for j in 0..n {
                let k = n - 1 - j;
                assert_eq!(b.rays[j].amplitude, b.rays[k].amplitude);
                assert_eq!(b.rays[j].position.x, -b.rays[k].position.x);
                assert_eq!(b.launch.spacings[j], b.launch.spacings[k]);
            }
        }
    }
}
