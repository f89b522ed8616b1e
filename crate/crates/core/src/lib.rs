//! Numerical laboratory for the vortex filament equation
//! `X_t = X_s ∧ X_ss` and its tangent flow `T_t = T ∧ T_ss`.
//!
//! The algebraic side ([`gauss`], [`polygon`]) builds the skew polygon
//! reached from a planar regular `M`-gon at rational times; the analytic
//! side ([`selfsimilar`]) integrates the one-corner self-similar profile.
//! [`evolver`] is a pseudo-spectral solver, [`spectral`] and [`momentum`]
//! hold the energy and linear-momentum analyses.

pub mod error;
pub mod evolver;
pub mod fourier;
pub mod gamma;
pub mod gauss;
pub mod momentum;
pub mod polygon;
pub mod selfsimilar;
pub mod spectral;

pub use error::{Error, Result};

/// Three-vectors used throughout.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 real matrices used for frames and rotations.
pub type Mat3 = nalgebra::Matrix3<f64>;
