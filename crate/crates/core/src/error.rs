//! Error taxonomy shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Invalid scenario, profile, or integration parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Adjacent rays swapped transverse order (or a tube collapsed).
    /// Crossings invalidate the single-valued wavefront assumption and
    /// abort the run rather than being silently tolerated.
    #[error("crossing fault at step {step} between rays {ray_a} and {ray_b}")]
    Crossing {
        step: u64,
        ray_a: usize,
        ray_b: usize,
    },

    /// A ray entered a classically forbidden region (negative squared
    /// wavenumber or negative relativistic radicand).
    #[error("evanescent region: {0}")]
    Evanescent(String),

    /// Field queried outside the configured domain box.
    #[error("out-of-domain query at ({x}, {z})")]
    OutOfDomain { x: f64, z: f64 },

    /// Too few rays (or samples) for the finite-difference stencils.
    #[error("stencil error: {0}")]
    Stencil(String),

    /// A record does not contain the ray or scenario shape an analysis needs.
    #[error("identification error: {0}")]
    Identification(String),

    /// The diffraction quadrature cannot resolve the integrand oscillations.
    #[error("oracle resolution error: {0}")]
    OracleResolution(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
