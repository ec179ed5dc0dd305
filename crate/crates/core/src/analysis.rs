//! Post-processing of trajectory records: intensity profiles, waist-line
//! comparison, fringe extraction against an independent diffraction oracle,
//! and the uncertainty-product diagnostic.
//!
//! Everything here reads immutable records; nothing feeds back into the
//! dynamics. The Fresnel oracle is deliberately a separate numerical route
//! (direct quadrature of the scalar diffraction integral over the launch
//! amplitude) so it can cross-check the trajectory results.

use crate::beam::{BeamProfile, ProfileKind};
use crate::bundle::{launch_abscissas, voronoi_spacings};
use crate::dynamics::{Snapshot, TrajectoryRecord};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Transverse intensity profile at a station of constant z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityProfile {
    pub z: f64,
    /// `(x, R²)` pairs ordered by strictly increasing x.
    pub samples: Vec<(f64, f64)>,
    /// Which snapshots and interpolation produced the samples.
    pub provenance: String,
    /// Rays that never crossed the station plane; empty for a complete
    /// profile.
    pub missing_rays: Vec<usize>,
}

/// Linearly interpolate ray `ray_index` onto the plane of constant z.
/// Returns `None` if the ray never crosses it within the record.
fn interpolate_ray_at_z(
    record: &TrajectoryRecord,
    ray_index: usize,
    z: f64,
) -> Option<(crate::bundle::RayState, usize)> {
    let snaps = &record.snapshots;
    for i in 0..snaps.len() {
        let za = snaps[i].states[ray_index].position.z;
        if za == z {
            return Some((snaps[i].states[ray_index], i));
        }
        if i + 1 == snaps.len() {
            break;
        }
        let zb = snaps[i + 1].states[ray_index].position.z;
        if (za < z && z <= zb) || (zb <= z && z < za) {
            let a = &snaps[i].states[ray_index];
            let b = &snaps[i + 1].states[ray_index];
            let t = (z - za) / (zb - za);
            let lerp = |u: f64, v: f64| u + t * (v - u);
            return Some((
                crate::bundle::RayState {
                    position: crate::vec2::Vec2::new(lerp(a.position.x, b.position.x), z),
                    momentum: crate::vec2::Vec2::new(
                        lerp(a.momentum.x, b.momentum.x),
                        lerp(a.momentum.z, b.momentum.z),
                    ),
                    amplitude: lerp(a.amplitude, b.amplitude),
                    wave_potential: lerp(a.wave_potential, b.wave_potential),
                    launch_index: a.launch_index,
                },
                i,
            ));
        }
    }
    None
}

/// Intensity profile at station `z` by per-ray linear interpolation of the
/// snapshot series. Rays that do not reach the plane are listed in
/// `missing_rays` (a partial-profile warning, not an error) as long as at
/// least two rays do.
pub fn intensity_profile(record: &TrajectoryRecord, z: f64) -> Result<IntensityProfile> {
    let n_rays = record
        .snapshots
        .first()
        .map(|s| s.states.len())
        .unwrap_or(0);
    if n_rays == 0 {
        return Err(Error::Identification("record contains no snapshots".into()));
    }
    let mut samples = Vec::with_capacity(n_rays);
    let mut missing = Vec::new();
    let mut snap_lo = usize::MAX;
    let mut snap_hi = 0usize;
    for j in 0..n_rays {
        match interpolate_ray_at_z(record, j, z) {
            Some((state, i)) => {
                samples.push((state.position.x, state.amplitude * state.amplitude));
                snap_lo = snap_lo.min(i);
                snap_hi = snap_hi.max(i + 1);
            }
            None => missing.push(j),
        }
    }
    if samples.len() < 2 {
        return Err(Error::Identification(format!(
            "station z = {z} is outside the range reached by the record"
        )));
    }
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(IntensityProfile {
        z,
        samples,
        provenance: format!(
            "linear interpolation between snapshots {snap_lo}..={snap_hi} of {}",
            record.snapshots.len()
        ),
        missing_rays: missing,
    })
}

/// Analytic paraxial waist ordinate `sqrt(w0² + (λ0 z / π w0)²)`; the
/// envelope trajectories start at ±w0.
pub fn waist_line(z: f64, w0: f64, lambda0: f64) -> f64 {
    let spread = lambda0 * z / (PI * w0);
    (w0 * w0 + spread * spread).sqrt()
}

/// One row of the waist comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaistRow {
    pub z: f64,
    pub x_upper: f64,
    pub x_lower: f64,
    pub x_analytic: f64,
    pub err_upper: f64,
    pub err_lower: f64,
}

/// Locate the rays launched nearest ±w0; they must sit within half a
/// launch spacing of the targets.
fn waist_ray_indices(record: &TrajectoryRecord) -> Result<(usize, usize)> {
    let w0 = match &record.scenario.beam.kind {
        ProfileKind::Gaussian { waist } => *waist,
        other => {
            return Err(Error::Identification(format!(
                "waist comparison needs a gaussian record, got {other:?}"
            )))
        }
    };
    let launch = record
        .snapshots
        .first()
        .ok_or_else(|| Error::Identification("record contains no snapshots".into()))?;
    let half_spacing = 0.5 * record.scenario.launch_grid_spacing();
    let find = |target: f64| -> Result<usize> {
        let (best, dist) = launch
            .states
            .iter()
            .enumerate()
            .map(|(j, r)| (j, (r.position.x - target).abs()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if dist > half_spacing {
            return Err(Error::Identification(format!(
                "no ray launched within half a spacing of x = {target}"
            )));
        }
        Ok(best)
    };
    Ok((find(w0)?, find(-w0)?))
}

/// Per-snapshot comparison of the ±w0 trajectories against the analytic
/// waist line.
pub fn waist_table(record: &TrajectoryRecord) -> Result<Vec<WaistRow>> {
    let (upper, lower) = waist_ray_indices(record)?;
    let w0 = record.scenario.beam.waist();
    let lambda0 = record.scenario.lambda0;
    Ok(record
        .snapshots
        .iter()
        .map(|snap| {
            let ru = &snap.states[upper];
            let rl = &snap.states[lower];
            let z = 0.5 * (ru.position.z + rl.position.z);
            let analytic = waist_line(z, w0, lambda0);
            WaistRow {
                z,
                x_upper: ru.position.x,
                x_lower: rl.position.x,
                x_analytic: analytic,
                err_upper: (ru.position.x.abs() - analytic).abs() / analytic,
                err_lower: (rl.position.x.abs() - analytic).abs() / analytic,
            }
        })
        .collect())
}

/// Max over snapshots of the relative deviation of the ±w0 rays from the
/// analytic waist line.
pub fn waist_error(record: &TrajectoryRecord) -> Result<f64> {
    Ok(waist_table(record)?
        .iter()
        .map(|row| row.err_upper.max(row.err_lower))
        .fold(0.0, f64::max))
}

/// The uncertainty diagnostic at one station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyPoint {
    pub z: f64,
    /// Launch localization width, fixed at 2 w0.
    pub delta_x: f64,
    /// Full range of transverse momentum across the bundle at z.
    pub delta_p: f64,
    pub product: f64,
    /// Set when fewer than two rays reach the station.
    pub degenerate: bool,
}

/// Uncertainty product at station `z`: `Δx = 2 w0` (the launch slit
/// localization, not recomputed downstream) times the full observed range
/// of transverse momentum.
pub fn uncertainty_product(record: &TrajectoryRecord, z: f64) -> Result<UncertaintyPoint> {
    let w0 = record.scenario.beam.waist();
    let delta_x = 2.0 * w0;
    let n_rays = record
        .snapshots
        .first()
        .map(|s| s.states.len())
        .unwrap_or(0);
    let mut p_min = f64::INFINITY;
    let mut p_max = f64::NEG_INFINITY;
    let mut reached = 0usize;
    for j in 0..n_rays {
        if let Some((state, _)) = interpolate_ray_at_z(record, j, z) {
            p_min = p_min.min(state.momentum.x);
            p_max = p_max.max(state.momentum.x);
            reached += 1;
        }
    }
    if reached < 2 {
        return Ok(UncertaintyPoint {
            z,
            delta_x,
            delta_p: 0.0,
            product: 0.0,
            degenerate: true,
        });
    }
    let delta_p = p_max - p_min;
    Ok(UncertaintyPoint {
        z,
        delta_x,
        delta_p,
        product: delta_x * delta_p,
        degenerate: false,
    })
}

/// Standard-deviation variant of the uncertainty diagnostic (exposed as an
/// option; the full-range convention above is the reference one). Spreads
/// are flux-weighted standard deviations of x and p_x, each doubled.
pub fn uncertainty_product_stddev(record: &TrajectoryRecord, z: f64) -> Result<UncertaintyPoint> {
    let n_rays = record
        .snapshots
        .first()
        .map(|s| s.states.len())
        .unwrap_or(0);
    let mut xs = Vec::new();
    let mut ps = Vec::new();
    let mut ws = Vec::new();
    for j in 0..n_rays {
        if let Some((state, _)) = interpolate_ray_at_z(record, j, z) {
            xs.push(state.position.x);
            ps.push(state.momentum.x);
            ws.push(state.amplitude * state.amplitude);
        }
    }
    if xs.len() < 2 {
        return Ok(UncertaintyPoint {
            z,
            delta_x: 0.0,
            delta_p: 0.0,
            product: 0.0,
            degenerate: true,
        });
    }
    let wsum: f64 = ws.iter().sum();
    let stddev = |vals: &[f64]| -> f64 {
        let mean: f64 = vals.iter().zip(&ws).map(|(v, w)| v * w).sum::<f64>() / wsum;
        let var: f64 = vals
            .iter()
            .zip(&ws)
            .map(|(v, w)| w * (v - mean) * (v - mean))
            .sum::<f64>()
            / wsum;
        var.sqrt()
    };
    let delta_x = 2.0 * stddev(&xs);
    let delta_p = 2.0 * stddev(&ps);
    Ok(UncertaintyPoint {
        z,
        delta_x,
        delta_p,
        product: delta_x * delta_p,
        degenerate: false,
    })
}

/// Launch amplitude as a function of the aperture coordinate, for the
/// diffraction quadrature. Table profiles are linearly interpolated over
/// the launch grid.
fn launch_amplitude_fn(profile: &BeamProfile) -> impl Fn(f64) -> f64 + '_ {
    let table_grid = match &profile.kind {
        ProfileKind::Table { .. } => launch_abscissas(profile.span, profile.ray_count),
        _ => Vec::new(),
    };
    move |xi: f64| match &profile.kind {
        ProfileKind::Table { amplitudes } => {
            if xi <= table_grid[0] || xi >= *table_grid.last().unwrap() {
                return 0.0;
            }
            let idx = table_grid.partition_point(|&g| g <= xi) - 1;
            let idx = idx.min(table_grid.len() - 2);
            let t = (xi - table_grid[idx]) / (table_grid[idx + 1] - table_grid[idx]);
            amplitudes[idx] + t * (amplitudes[idx + 1] - amplitudes[idx])
        }
        _ => profile.amplitude_at(xi),
    }
}

/// Reference intensities from the scalar Fresnel diffraction integral of
/// the launch amplitude, evaluated by direct quadrature:
///
/// `u(x, z) = sqrt(k / 2π z) ∫ A(ξ) exp(i k (x-ξ)² / 2z) dξ`,  `I = |u|²`.
///
/// The sampling resolves the chirp phase with at least 20 points per cycle
/// (plus a floor for the envelope); if that would require more than the
/// hard cap of points, the station is too close for the quadrature and an
/// oracle-resolution error is returned.
pub fn diffraction_oracle(
    profile: &BeamProfile,
    lambda0: f64,
    z: f64,
    xs: &[f64],
) -> Result<Vec<f64>> {
    if !(z > 0.0) {
        return Err(Error::config(format!(
            "diffraction oracle needs z > 0, got {z}"
        )));
    }
    if !(lambda0 > 0.0) {
        return Err(Error::config("lambda0 must be positive"));
    }
    const POINTS_PER_CYCLE: f64 = 20.0;
    const MIN_POINTS: usize = 801;
    const MAX_POINTS: usize = 8_000_001;

    let k = 2.0 * PI / lambda0;
    let half = profile.span;
    let amp = launch_amplitude_fn(profile);

    let x_extent = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    // Worst-case phase slope over the aperture, cycles across it.
    let max_slope = k * (x_extent + half) / z;
    let cycles = max_slope * (2.0 * half) / (2.0 * PI);
    let mut n_points = ((POINTS_PER_CYCLE * cycles).ceil() as usize).max(MIN_POINTS);
    if n_points % 2 == 0 {
        n_points += 1; // Simpson needs an even interval count.
    }
    if n_points > MAX_POINTS {
        return Err(Error::OracleResolution(format!(
            "station z = {z} requires {n_points} quadrature points (cap {MAX_POINTS}); \
             the chirp is too fast for direct quadrature this close to the aperture"
        )));
    }

    let h = (2.0 * half) / (n_points - 1) as f64;
    // Precompute the aperture samples once; the phase depends on x.
    let xi: Vec<f64> = (0..n_points).map(|i| -half + h * i as f64).collect();
    let a: Vec<f64> = xi.iter().map(|&v| amp(v)).collect();

    let prefactor = k / (2.0 * PI * z);
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let mut sum_re = 0.0;
        let mut sum_im = 0.0;
        for (i, (&xi_i, &a_i)) in xi.iter().zip(&a).enumerate() {
            // Simpson weights 1,4,2,...,2,4,1.
            let w = if i == 0 || i == n_points - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let d = x - xi_i;
            let phase = k * d * d / (2.0 * z);
            let (s, c) = phase.sin_cos();
            sum_re += w * a_i * c;
            sum_im += w * a_i * s;
        }
        let scale = h / 3.0;
        let re = sum_re * scale;
        let im = sum_im * scale;
        out.push(prefactor * (re * re + im * im));
    }
    Ok(out)
}

/// Kind of a local extremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub x: f64,
    pub intensity: f64,
    pub kind: ExtremumKind,
}

/// Local maxima/minima of an intensity profile by three-point comparison
/// with quadratic sub-sample refinement, sorted by x.
pub fn fringe_extrema(profile: &IntensityProfile) -> Result<Vec<Extremum>> {
    let s = &profile.samples;
    if s.len() < 5 {
        return Err(Error::Stencil(format!(
            "fringe extraction needs at least 5 samples, got {}",
            s.len()
        )));
    }
    let mut out = Vec::new();
    for j in 1..s.len() - 1 {
        let (x1, y1) = s[j - 1];
        let (x2, y2) = s[j];
        let (x3, y3) = s[j + 1];
        let kind = if y2 > y1 && y2 > y3 {
            ExtremumKind::Maximum
        } else if y2 < y1 && y2 < y3 {
            ExtremumKind::Minimum
        } else {
            continue;
        };
        // Vertex of the parabola through the three samples.
        let h_m = x2 - x1;
        let h_p = x3 - x2;
        let num = (y1 - y2) * h_p * h_p - (y3 - y2) * h_m * h_m;
        let den = (y1 - y2) * h_p + (y3 - y2) * h_m;
        let (x_ref, y_ref) = if den.abs() > 0.0 {
            let dx = 0.5 * num / den;
            (x2 + dx, y2)
        } else {
            (x2, y2)
        };
        out.push(Extremum {
            x: x_ref,
            intensity: y_ref,
            kind,
        });
    }
    Ok(out)
}

/// Total flux `Σ R² · spacing · |p|` across a snapshot, with spacings
/// recovered from the snapshot geometry.
pub fn snapshot_total_flux(snapshot: &Snapshot) -> f64 {
    let n = snapshot.states.len();
    let mut arc = Vec::with_capacity(n);
    arc.push(0.0);
    for j in 0..n - 1 {
        let seg = snapshot.states[j + 1].position - snapshot.states[j].position;
        arc.push(arc[j] + seg.norm());
    }
    let spacings = voronoi_spacings(&arc);
    snapshot
        .states
        .iter()
        .zip(&spacings)
        .map(|(r, s)| r.amplitude * r.amplitude * s * r.momentum.norm())
        .sum()
}

/// True when the record was produced with the wave potential disabled
/// (eikonal mode); some comparisons are expected to disagree then.
pub fn is_eikonal(record: &TrajectoryRecord) -> bool {
    !record.scenario.wave_potential_enabled
}

/// Planck constant `h = 2πħ` in the record's units.
pub fn planck_h(record: &TrajectoryRecord) -> f64 {
    2.0 * PI * record.scenario.units.hbar
}

/// Quantum-mode z stations available in a record: the mean ray z of each
/// snapshot after the launch one.
pub fn snapshot_stations(record: &TrajectoryRecord) -> Vec<f64> {
    record
        .snapshots
        .iter()
        .map(|s| {
            s.states.iter().map(|r| r.position.z).sum::<f64>() / s.states.len() as f64
        })
        .collect()
}
