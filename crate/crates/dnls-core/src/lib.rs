//! Pseudospectral laboratory for the derivative nonlinear Schrödinger equation
//! on the circle,
//!
//! ```text
//!     u_t - i u_xx = d_x(|u|^2 u),    x in T = R/2piZ,
//! ```
//!
//! together with its gauge-transformed companion problem for
//! `z = e^{-ig(t)} tau_{-mu} G(u)`. The crate provides
//!
//! * a Fourier core on the 2pi-periodic grid with the `1/sqrt(2pi)`
//!   transform convention ([`spectral`]),
//! * the conserved functionals mass, momentum and energy ([`conserved`]),
//! * the full gauge chain `u -> v -> w -> z` and its inverse ([`gauge`]),
//! * exact evaluation of the resonance-constrained interaction terms of the
//!   gauge equation, its normal-form (differentiation by parts) reduction and
//!   the resulting Duhamel identity ([`terms`]),
//! * integrating-factor RK4 time stepping for both flows ([`evolve`]),
//! * discretized Bourgain-type space-time norms ([`spacetime`]),
//! * the headline experiments: nonlinear-smoothing signature, polynomial
//!   growth tracking, frequency-split series and a generic
//!   inequality-falsification harness ([`diagnostics`]).
//!
//! All operations are deterministic: identical inputs (including RNG seeds)
//! produce identical outputs.

pub mod conserved;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod gauge;
pub mod spacetime;
pub mod spectral;
pub mod terms;

pub use error::CoreError;
pub use spectral::{Spectrum, TorusField};

/// sqrt(2*pi), the normalization constant of the Fourier convention.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// 2*pi.
pub const TWO_PI: f64 = std::f64::consts::TAU;
