//! Dispersion relations `c(k)` of linear surface waves riding on a vertically
//! sheared current.
//!
//! The Rayleigh equation with a free-surface condition is discretised by
//! Chebyshev collocation ([`spectral`], [`collocation`]). Dispersion curves are
//! traced by path following with dense output ([`path`]), over two-dimensional
//! wave vectors ([`grid`]) and at large wavenumbers with depth truncation
//! ([`depth`]). Everything is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

pub mod collocation;
pub mod depth;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod path;
pub mod scalar;
pub mod shear;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CollocationOperator = spectral::CollocationOperator<f64>;
pub type ShearProfile = shear::ShearProfile<f64>;
pub type ReducedProfile = shear::ReducedProfile<f64>;
pub type EigenSolution = collocation::EigenSolution<f64>;
pub type PathSolution = path::PathSolution<f64>;
pub type PathOptions = path::PathOptions<f64>;
pub type DepthPlan = depth::DepthPlan<f64>;
pub type AdaptivePath = depth::AdaptivePath<f64>;
pub type PolarField = grid::PolarField<f64>;
pub type StabilityReport = diagnostics::StabilityReport<f64>;
