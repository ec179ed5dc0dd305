//! Coupled ray-bundle integration for Helmholtz-type wave systems.
//!
//! A monochromatic (or mono-energetic) wave field splits exactly into a
//! bundle of ray trajectories plus an amplitude field carried on the
//! wavefront. The amplitude feeds back on the rays through a wave potential
//! proportional to `∇²R/R`, whose gradient acts perpendicular to each ray's
//! momentum. With that coupling enabled the bundle reproduces diffraction
//! and interference; with it disabled the rays reduce to ordinary
//! geometrical optics / classical dynamics.
//!
//! Crate layout:
//! - [`units`], [`beam`], [`medium`], [`scenario`], [`bundle`]: domain types
//!   and launch-time construction.
//! - [`transport`]: wavefront geometry, flux-conserving amplitude transport,
//!   and wave-potential evaluation (the closure that couples the rays).
//! - [`dynamics`]: the Hamiltonian systems and the synchronized symplectic
//!   stepping loop.
//! - [`analysis`]: intensity profiles, waist tracking, fringe extraction
//!   with an independent Fresnel oracle, and the uncertainty-product
//!   diagnostic.

pub mod analysis;
pub mod beam;
pub mod bundle;
pub mod dynamics;
pub mod error;
pub mod medium;
pub mod scenario;
pub mod transport;
pub mod units;
pub mod vec2;

pub use beam::BeamProfile;
pub use bundle::{make_bundle, Bundle, RayState};
pub use dynamics::{run, ClassicalStepper, Stepper, StepReport, TrajectoryRecord};
pub use error::{Error, Result};
pub use medium::{Medium, MediumField, MediumKind};
pub use scenario::{EdgeStencilPolicy, Integration, Regularization, Scenario, SystemKind};
pub use transport::WavefrontFrame;
pub use units::Units;
pub use vec2::Vec2;
