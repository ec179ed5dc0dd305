//! The Hamiltonian trajectory systems and the synchronized stepping loop.
//!
//! One step advances the whole bundle with a second-order Strang splitting
//! (kick-drift-kick) and a field refresh before each momentum half-kick:
//!
//! 1. rebuild the wavefront frame, re-transport amplitudes, re-evaluate the
//!    wave potential and its arc-length gradient;
//! 2. half-kick the momenta with the combined external + wave force;
//! 3. full drift of the positions with the mode velocity map;
//! 4. refresh the fields on the new front;
//! 5. half-kick with the refreshed forces.
//!
//! The wave force is perpendicular to each momentum by construction, so it
//! bends trajectories without changing |p|; external forces come from the
//! medium's exact gradient. The wave force couples all rays, so strict
//! symplecticity holds per frozen field only; conservation is therefore
//! monitored every step rather than assumed.

use crate::bundle::{make_bundle, Bundle, RayState};
use crate::error::{Error, Result};
use crate::scenario::{Scenario, SystemKind};
use crate::transport::{
    build_frame, transport_amplitude, transverse_laplacian, wave_potential,
    wave_potential_gradient, WavefrontFrame,
};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Per-step conservation and regularization diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: u64,
    pub time: f64,
    /// Hamiltonian of every ray at this step.
    pub hamiltonians: Vec<f64>,
    /// Max over rays and steps so far of |H - H(0)| / max(|H(0)|, E).
    pub max_rel_h_drift: f64,
    /// Max over rays and steps so far of |dot(∇Q, p)| / (|∇Q||p|).
    pub max_perp_ratio: f64,
    /// Max over rays and steps so far of | |p| - |p(0)| | / |p(0)|.
    pub max_p_drift: f64,
    /// Max over rays and steps so far of the relative tube-flux error.
    pub max_flux_err: f64,
    /// Amplitude clamp events in this step's field refreshes.
    pub clamp_count: u64,
    pub crossing: bool,
}

/// One stored state of the bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub time: f64,
    pub states: Vec<RayState>,
}

/// The persisted form of a run: scenario echo, snapshot series, and
/// diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub scenario: Scenario,
    pub snapshots: Vec<Snapshot>,
    pub reports: Vec<StepReport>,
}

impl TrajectoryRecord {
    /// Final z reached by the slowest ray (0 for an empty record).
    pub fn max_common_z(&self) -> f64 {
        self.snapshots
            .last()
            .map(|s| {
                s.states
                    .iter()
                    .map(|r| r.position.z)
                    .fold(f64::INFINITY, f64::min)
            })
            .unwrap_or(0.0)
    }
}

/// A run that faulted mid-flight: the error plus the record up to the
/// offending step.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub partial: TrajectoryRecord,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.error)
    }
}

impl std::error::Error for RunFailure {}

/// Hamiltonian of one ray given the medium value at its position.
///
/// On-shell values: 0 for EM (`D`), the bundle energy otherwise.
pub fn hamiltonian(ray: &RayState, scenario: &Scenario, medium_value: f64) -> Result<f64> {
    hamiltonian_inner(ray, scenario, scenario.energy(), medium_value)
}

fn hamiltonian_inner(
    ray: &RayState,
    scenario: &Scenario,
    energy: f64,
    medium_value: f64,
) -> Result<f64> {
    let u = &scenario.units;
    let c = u.light_speed;
    match scenario.system {
        SystemKind::Em => {
            // D = (c / 2 k0)(k² - (n k0)²) + W; zero on-shell.
            let k0 = scenario.k0();
            let k_sq = ray.momentum.norm_sq();
            let nk0 = medium_value * k0;
            Ok(c / (2.0 * k0) * (k_sq - nk0 * nk0) + ray.wave_potential)
        }
        SystemKind::Quantum => {
            Ok(ray.momentum.norm_sq() / (2.0 * u.mass) + medium_value + ray.wave_potential)
        }
        SystemKind::Relativistic | SystemKind::Massless => {
            let rest = u.mass * c * c;
            let radicand = ray.momentum.norm_sq() * c * c
                + rest * rest
                + 2.0 * energy * ray.wave_potential;
            if radicand < 0.0 {
                return Err(Error::Evanescent(format!(
                    "negative relativistic radicand {radicand:.6e} at ({}, {})",
                    ray.position.x, ray.position.z
                )));
            }
            Ok(medium_value + radicand.sqrt())
        }
    }
}

/// Velocity map dr/dt for one ray. `medium_value` is n (EM) or V
/// (matter-wave systems) at the ray position.
fn mode_velocity(
    scenario: &Scenario,
    energy: f64,
    momentum: Vec2,
    medium_value: f64,
) -> Result<Vec2> {
    let u = &scenario.units;
    let c = u.light_speed;
    match scenario.system {
        SystemKind::Em | SystemKind::Massless => {
            let k0_eff = effective_k0(scenario, energy);
            Ok(momentum.scale(c / (u.hbar * k0_eff)))
        }
        SystemKind::Quantum => Ok(momentum.scale(1.0 / u.mass)),
        SystemKind::Relativistic => {
            let denom = energy - medium_value;
            if denom <= 0.0 {
                return Err(Error::Evanescent(format!(
                    "E - V = {denom:.6e} <= 0 in relativistic velocity map"
                )));
            }
            Ok(momentum.scale(c * c / denom))
        }
    }
}

/// Vacuum wavenumber entering the EM-family equations: `2π/λ0` for EM,
/// `E/ħc` for massless matter waves (numerically identical when launched
/// from vacuum).
fn effective_k0(scenario: &Scenario, energy: f64) -> f64 {
    match scenario.system {
        SystemKind::Massless => energy / (scenario.units.hbar * scenario.units.light_speed),
        _ => scenario.k0(),
    }
}

/// External (medium) force on the momentum: `∇[(c ħ k0/2) n²]` for the
/// EM family, `-∇V` for matter waves.
fn mode_external_force(
    scenario: &Scenario,
    energy: f64,
    medium_value: f64,
    medium_grad: Vec2,
) -> Vec2 {
    let u = &scenario.units;
    let c = u.light_speed;
    match scenario.system {
        SystemKind::Em => {
            let k0 = scenario.k0();
            medium_grad.scale(c * u.hbar * k0 * medium_value)
        }
        SystemKind::Massless => {
            // n = 1 - V/E, ∇n = -∇V/E.
            let k0_eff = effective_k0(scenario, energy);
            let index = 1.0 - medium_value / energy;
            medium_grad.scale(-1.0 / energy).scale(c * u.hbar * k0_eff * index)
        }
        SystemKind::Quantum | SystemKind::Relativistic => -medium_grad,
    }
}

/// Factor multiplying the (negated) wave-potential gradient in the kick:
/// `(1 - V/E)⁻¹` in the relativistic system, 1 elsewhere.
fn mode_wave_factor(scenario: &Scenario, energy: f64, medium_value: f64) -> f64 {
    match scenario.system {
        SystemKind::Relativistic => 1.0 / (1.0 - medium_value / energy),
        _ => 1.0,
    }
}

/// Classically-forbidden-region guard, applied at every kick.
fn check_allowed(scenario: &Scenario, energy: f64, medium_value: f64, pos: Vec2) -> Result<()> {
    match scenario.system {
        SystemKind::Quantum | SystemKind::Massless => {
            if energy - medium_value <= 0.0 {
                return Err(Error::Evanescent(format!(
                    "E - V = {:.6e} <= 0 at ({}, {})",
                    energy - medium_value,
                    pos.x,
                    pos.z
                )));
            }
        }
        SystemKind::Relativistic => {
            let rest = scenario.units.mass * scenario.units.light_speed.powi(2);
            if energy - medium_value <= rest {
                return Err(Error::Evanescent(format!(
                    "E - V = {:.6e} fell below the rest energy at ({}, {})",
                    energy - medium_value,
                    pos.x,
                    pos.z
                )));
            }
        }
        SystemKind::Em => {}
    }
    Ok(())
}

/// Running conservation maxima, updated every step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservationMonitor {
    pub max_rel_h_drift: f64,
    pub max_perp_ratio: f64,
    pub max_p_drift: f64,
    pub max_flux_err: f64,
    pub total_clamps: u64,
}

/// Advances one bundle under a scenario, with persistent scratch buffers
/// and conservation monitors. Single-writer: one stepper drives one bundle.
pub struct Stepper {
    scenario: Scenario,
    energy: f64,
    energy_scale: f64,
    amplitude_floor: f64,
    /// Per-ray Hamiltonian at launch; drift is measured against these.
    h0: Vec<f64>,
    /// Per-ray tube flux at launch.
    flux0: Vec<f64>,
    pub monitor: ConservationMonitor,
    step_clamps: u64,
    wave_grad: Vec<Vec2>,
}

impl Stepper {
    /// Prepare a stepper for `bundle`, performing the initial field refresh
    /// so the launch snapshot carries amplitudes and wave potentials.
    pub fn new(scenario: &Scenario, bundle: &mut Bundle) -> Result<Self> {
        let energy = scenario.energy();
        let amplitude_floor = scenario.amplitude_floor(bundle.max_launch_amplitude());
        let mut stepper = Stepper {
            scenario: scenario.clone(),
            energy,
            energy_scale: energy.abs(),
            amplitude_floor,
            h0: Vec::new(),
            flux0: Vec::new(),
            monitor: ConservationMonitor::default(),
            step_clamps: 0,
            wave_grad: Vec::new(),
        };
        stepper.refresh_fields(bundle)?;
        stepper.flux0 = bundle
            .launch
            .amplitudes
            .iter()
            .zip(&bundle.launch.spacings)
            .zip(&bundle.launch.momentum_magnitudes)
            .map(|((a, s), p)| a * a * s * p)
            .collect();
        stepper.h0 = stepper.hamiltonians(bundle)?;
        Ok(stepper)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Rebuild frame, re-transport amplitudes, re-evaluate the wave
    /// potential and its gradient; update flux/perpendicularity monitors.
    fn refresh_fields(&mut self, bundle: &mut Bundle) -> Result<()> {
        let frame = build_frame(bundle)?;
        let amplitudes = transport_amplitude(bundle, &frame)?;
        for (ray, a) in bundle.rays.iter_mut().zip(&amplitudes) {
            ray.amplitude = *a;
        }
        let laplacians = transverse_laplacian(
            &frame,
            &amplitudes,
            self.scenario.regularization.edge_stencil,
        )?;
        let (potentials, clamps) = wave_potential(
            &self.scenario,
            &laplacians,
            &amplitudes,
            self.amplitude_floor,
        );
        self.step_clamps += clamps;
        self.monitor.total_clamps += clamps;
        for (ray, q) in bundle.rays.iter_mut().zip(&potentials) {
            ray.wave_potential = *q;
        }
        self.wave_grad = wave_potential_gradient(&frame, &potentials);
        self.update_field_monitors(bundle, &frame);
        Ok(())
    }

    fn update_field_monitors(&mut self, bundle: &Bundle, frame: &WavefrontFrame) {
        if !self.flux0.is_empty() {
            for (j, ray) in bundle.rays.iter().enumerate() {
                let flux =
                    ray.amplitude * ray.amplitude * frame.spacings[j] * ray.momentum.norm();
                if self.flux0[j] > 0.0 {
                    let err = (flux - self.flux0[j]).abs() / self.flux0[j];
                    self.monitor.max_flux_err = self.monitor.max_flux_err.max(err);
                }
            }
        }
        for (g, ray) in self.wave_grad.iter().zip(&bundle.rays) {
            let p = ray.momentum;
            let denom = g.norm() * p.norm();
            if denom > 0.0 {
                // The force is (slope/|p|)·perp(p); in that factorization
                // the momentum dot reduces to perp(p)·p, which is exactly
                // zero in IEEE arithmetic (multiplication commutes). Only
                // flattening the factors into components would smear this
                // by one ulp.
                let parallel = (g.norm() / p.norm()) * p.perp().dot(p);
                let ratio = parallel.abs() / denom;
                self.monitor.max_perp_ratio = self.monitor.max_perp_ratio.max(ratio);
            }
        }
    }

    fn hamiltonians(&self, bundle: &Bundle) -> Result<Vec<f64>> {
        bundle
            .rays
            .iter()
            .map(|ray| {
                let (value, _) = self.scenario.medium.eval(ray.position)?;
                hamiltonian_inner(ray, &self.scenario, self.energy, value)
            })
            .collect()
    }

    fn update_conservation_monitors(&mut self, bundle: &Bundle) -> Result<()> {
        let hs = self.hamiltonians(bundle)?;
        for (j, (h, ray)) in hs.iter().zip(&bundle.rays).enumerate() {
            let denom = self.h0[j].abs().max(self.energy_scale);
            if denom > 0.0 {
                let drift = (h - self.h0[j]).abs() / denom;
                self.monitor.max_rel_h_drift = self.monitor.max_rel_h_drift.max(drift);
            }
            let p0 = bundle.launch.momentum_magnitudes[j];
            let p_drift = (ray.momentum.norm() - p0).abs() / p0;
            self.monitor.max_p_drift = self.monitor.max_p_drift.max(p_drift);
        }
        Ok(())
    }

    /// One synchronized kick-drift-kick step of the whole bundle.
    pub fn step(&mut self, bundle: &mut Bundle, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::config(format!("dt must be positive, got {dt}")));
        }
        self.step_clamps = 0;
        // Fields for the first half-kick reflect the current state (the
        // previous refresh predates the trailing half-kick's momenta).
        self.refresh_fields(bundle)?;
        self.update_conservation_monitors(bundle)?;
        let half = 0.5 * dt;
        self.kick(bundle, half)?;
        self.drift(bundle, dt)?;
        self.refresh_fields(bundle)?;
        self.kick(bundle, half)?;
        bundle.time += dt;
        bundle.step_count += 1;
        Ok(())
    }

    fn kick(&self, bundle: &mut Bundle, half_dt: f64) -> Result<()> {
        let wave_on = self.scenario.wave_potential_enabled;
        for (j, ray) in bundle.rays.iter_mut().enumerate() {
            let (value, grad) = self.scenario.medium.eval(ray.position)?;
            check_allowed(&self.scenario, self.energy, value, ray.position)?;
            let mut force = mode_external_force(&self.scenario, self.energy, value, grad);
            if wave_on {
                let factor = mode_wave_factor(&self.scenario, self.energy, value);
                force += self.wave_grad[j].scale(-factor);
            }
            ray.momentum += force.scale(half_dt);
        }
        Ok(())
    }

    fn drift(&self, bundle: &mut Bundle, dt: f64) -> Result<()> {
        for ray in bundle.rays.iter_mut() {
            let value = match self.scenario.system {
                // Only the relativistic velocity map reads the medium.
                SystemKind::Relativistic => self.scenario.medium.eval(ray.position)?.0,
                _ => 0.0,
            };
            let v = mode_velocity(&self.scenario, self.energy, ray.momentum, value)?;
            ray.position += v.scale(dt);
        }
        Ok(())
    }

    /// Assemble a full report for the bundle's current state.
    pub fn report(&self, bundle: &Bundle) -> Result<StepReport> {
        Ok(StepReport {
            step: bundle.step_count,
            time: bundle.time,
            hamiltonians: self.hamiltonians(bundle)?,
            max_rel_h_drift: self.monitor.max_rel_h_drift,
            max_perp_ratio: self.monitor.max_perp_ratio,
            max_p_drift: self.monitor.max_p_drift,
            max_flux_err: self.monitor.max_flux_err,
            clamp_count: self.step_clamps,
            crossing: false,
        })
    }
}

/// One synchronized step of `bundle`; the free-function form of
/// [`Stepper::step`], with monitors referenced to the bundle's current
/// state. Prefer a persistent [`Stepper`] inside loops.
pub fn step(bundle: &mut Bundle, scenario: &Scenario, dt: f64) -> Result<StepReport> {
    let mut stepper = Stepper::new(scenario, bundle)?;
    stepper.step(bundle, dt)?;
    stepper.report(bundle)
}

/// The classical-dynamics reference integrator: the same kick-drift-kick
/// scheme with the wave potential identically zero and no amplitude
/// machinery. With the wave potential disabled, [`Stepper`] trajectories
/// coincide with this one bit for bit.
pub struct ClassicalStepper {
    scenario: Scenario,
    energy: f64,
}

impl ClassicalStepper {
    pub fn new(scenario: &Scenario) -> Self {
        ClassicalStepper {
            scenario: scenario.clone(),
            energy: scenario.energy(),
        }
    }

    pub fn step(&self, bundle: &mut Bundle, dt: f64) -> Result<()> {
        let half = 0.5 * dt;
        for ray in bundle.rays.iter_mut() {
            let (value, grad) = self.scenario.medium.eval(ray.position)?;
            check_allowed(&self.scenario, self.energy, value, ray.position)?;
            let force = mode_external_force(&self.scenario, self.energy, value, grad);
            ray.momentum += force.scale(half);
        }
        for ray in bundle.rays.iter_mut() {
            let value = match self.scenario.system {
                SystemKind::Relativistic => self.scenario.medium.eval(ray.position)?.0,
                _ => 0.0,
            };
            let v = mode_velocity(&self.scenario, self.energy, ray.momentum, value)?;
            ray.position += v.scale(dt);
        }
        for ray in bundle.rays.iter_mut() {
            let (value, grad) = self.scenario.medium.eval(ray.position)?;
            check_allowed(&self.scenario, self.energy, value, ray.position)?;
            let force = mode_external_force(&self.scenario, self.energy, value, grad);
            ray.momentum += force.scale(half);
        }
        Ok(())
    }
}

/// Execute a full scenario: build the bundle, step `n_steps` times,
/// snapshot every `snapshot_stride` steps (plus launch and the final step).
///
/// Deterministic: identical scenarios produce bit-identical records on the
/// same platform. On a physics fault the record up to the offending step is
/// returned inside the failure.
pub fn run(scenario: &Scenario) -> std::result::Result<TrajectoryRecord, Box<RunFailure>> {
    let empty_failure = |error: Error, scenario: &Scenario| {
        Box::new(RunFailure {
            error,
            partial: TrajectoryRecord {
                scenario: scenario.clone(),
                snapshots: Vec::new(),
                reports: Vec::new(),
            },
        })
    };

    let mut bundle = match make_bundle(&scenario.beam, scenario) {
        Ok(b) => b,
        Err(e) => return Err(empty_failure(e, scenario)),
    };
    let mut stepper = match Stepper::new(scenario, &mut bundle) {
        Ok(s) => s,
        Err(e) => return Err(empty_failure(e, scenario)),
    };

    let dt = scenario.dt();
    let n_steps = scenario.integration.n_steps;
    let stride = scenario.integration.snapshot_stride;

    let mut record = TrajectoryRecord {
        scenario: scenario.clone(),
        snapshots: Vec::new(),
        reports: Vec::new(),
    };
    let snapshot_of = |bundle: &Bundle| Snapshot {
        step: bundle.step_count,
        time: bundle.time,
        states: bundle.rays.clone(),
    };
    record.snapshots.push(snapshot_of(&bundle));
    match stepper.report(&bundle) {
        Ok(r) => record.reports.push(r),
        Err(e) => return Err(empty_failure(e, scenario)),
    }

    for step_index in 1..=n_steps {
        if let Err(error) = stepper.step(&mut bundle, dt) {
            // Retain the partial record, flagging the fault on a final
            // report of whatever state the bundle reached.
            let mut report = StepReport {
                step: step_index,
                time: bundle.time,
                hamiltonians: Vec::new(),
                max_rel_h_drift: stepper.monitor.max_rel_h_drift,
                max_perp_ratio: stepper.monitor.max_perp_ratio,
                max_p_drift: stepper.monitor.max_p_drift,
                max_flux_err: stepper.monitor.max_flux_err,
                clamp_count: 0,
                crossing: matches!(error, Error::Crossing { .. }),
            };
            if let Ok(full) = stepper.report(&bundle) {
                report.hamiltonians = full.hamiltonians;
            }
            record.snapshots.push(snapshot_of(&bundle));
            record.reports.push(report);
            return Err(Box::new(RunFailure {
                error,
                partial: record,
            }));
        }
        if step_index % stride == 0 || step_index == n_steps {
            record.snapshots.push(snapshot_of(&bundle));
            match stepper.report(&bundle) {
                Ok(r) => record.reports.push(r),
                Err(error) => {
                    return Err(Box::new(RunFailure {
                        error,
                        partial: record,
                    }))
                }
            }
        }
    }
    Ok(record)
}
