//! Identification of point pollution sources in parabolic heat and mass
//! transfer models from pointwise sensor measurements.
//!
//! The crate recovers the location and the time-dependent intensity of a
//! point source `q(t) δ(x - x₁)` from the time series recorded at a few
//! sensors. Locations come from the large-parameter asymptotics of the
//! Laplace-transformed sensor data (ratios of transforms at two sensors give
//! travel-distance differences), intensities come from a regularized
//! Volterra deconvolution of the sensor series.
//!
//! Modules:
//!
//! - [`model`]: domains, coefficients, sources, sensors and scenarios.
//! - [`forward`]: heat kernels, resolvent Green functions (exact and
//!   asymptotic), the free-space Duhamel oracle and a 1D Crank–Nicolson
//!   solver.
//! - [`laplace`]: truncated Laplace transforms of sampled series and
//!   Tikhonov-regularized first-kind Volterra deconvolution.
//! - [`identify1d`]: location, intensity and non-uniqueness diagnostics on
//!   an interval.
//! - [`identifynd`]: single-source localization in the plane and in space by
//!   distance differences and multilateration, plus identifiability checks.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod fit;
pub mod forward;
pub mod identify1d;
pub mod identifynd;
pub mod laplace;
pub mod model;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
pub use model::{Point, TimeGrid};
