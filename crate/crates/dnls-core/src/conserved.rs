//! The three conserved functionals of the flow,
//!
//! ```text
//!     M(u) = int |u|^2 dx
//!     P(u) = int [ Im(u conj(u_x)) + |u|^4 / 2 ] dx
//!     E(u) = int [ |u_x|^2 + (3/2) |u|^2 Im(u conj(u_x)) + |u|^6 / 2 ] dx
//! ```
//!
//! Derivatives are taken spectrally so that conservation drift along a
//! trajectory is attributable to the time integrator alone.

use serde::Serialize;

use crate::spectral::{analyze, derivative, synthesize, TorusField};
use crate::TWO_PI;

/// Mass, momentum and energy of a field at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservedTriple {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
}

impl ConservedTriple {
    pub fn of(u: &TorusField) -> Self {
        ConservedTriple { mass: mass(u), momentum: momentum(u), energy: energy(u) }
    }
}

fn quadrature(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() * TWO_PI / n as f64
}

fn spectral_dx(u: &TorusField) -> TorusField {
    synthesize(&derivative(&analyze(u), 1))
}

/// `int |u|^2 dx`.
pub fn mass(u: &TorusField) -> f64 {
    quadrature(u.samples().iter().map(|c| c.norm_sqr()), u.n())
}

/// `int [ Im(u conj(u_x)) + |u|^4 / 2 ] dx`. This is the Hamiltonian.
pub fn momentum(u: &TorusField) -> f64 {
    let ux = spectral_dx(u);
    let n = u.n();
    quadrature(
        u.samples().iter().zip(ux.samples()).map(|(u, ux)| {
            let im = (u * ux.conj()).im;
            im + 0.5 * u.norm_sqr() * u.norm_sqr()
        }),
        n,
    )
}

/// `int [ |u_x|^2 + (3/2) |u|^2 Im(u conj(u_x)) + |u|^6 / 2 ] dx`.
pub fn energy(u: &TorusField) -> f64 {
    let ux = spectral_dx(u);
    let n = u.n();
    quadrature(
        u.samples().iter().zip(ux.samples()).map(|(u, ux)| {
            let im = (u * ux.conj()).im;
            let a2 = u.norm_sqr();
            ux.norm_sqr() + 1.5 * a2 * im + 0.5 * a2 * a2 * a2
        }),
        n,
    )
}
