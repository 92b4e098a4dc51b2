//! The gauge chain `u -> v -> w -> z` and its inverse.
//!
//! ```text
//!     v = G(u) = e^{-i I(u)} u,          I = mean-zero primitive of |u|^2 - mu,
//!     w = tau_{-mu} v,                   what(xi) = e^{-2 i xi mu t} vhat(xi),
//!     z = e^{-i g(t)} w,                 g = (8pi^3-1)/(16pi^4) int ||w||_{L^4}^4 - mu^2 t,
//! ```
//!
//! with `mu = ||u_0||_{L^2}^2 / 2pi` constant along the flow. The pointwise
//! exponential factors are evaluated on the field's own grid, so the forward
//! and inverse maps compose to the identity at sample level (the phase depends
//! only on the moduli `|u_j|`, which every stage preserves).

use num_complex::Complex64;
use serde::Serialize;

use crate::conserved::mass;
use crate::error::CoreError;
use crate::spectral::{analyze, l4_fourth_power, synthesize, Spectrum, TorusField};
use crate::TWO_PI;

/// `(8 pi^3 - 1) / (16 pi^4)`, the coefficient of the L^4 integral in `g(t)`.
pub fn g_coefficient() -> f64 {
    let pi = std::f64::consts::PI;
    (8.0 * pi.powi(3) - 1.0) / (16.0 * pi.powi(4))
}

/// `mu = ||u||_{L^2}^2 / 2pi`.
pub fn compute_mu(u0: &TorusField) -> f64 {
    mass(u0) / TWO_PI
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeDirection {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainDirection {
    UToZ,
    ZToU,
}

/// Spectrum of `I(u)`: `Ihat(xi) = mhat(xi) / (i xi)` for `xi != 0`, `Ihat(0) = 0`,
/// where `m = |u|^2 - mu` is read off the grid samples.
fn primitive_spectrum(u: &TorusField) -> Spectrum {
    let sq = TorusField::new(u.samples().iter().map(|c| Complex64::new(c.norm_sqr(), 0.0)).collect())
        .expect("|u|^2 of a valid field is valid");
    let m = analyze(&sq);
    let mut out = Spectrum::zeros(u.n());
    for (xi, c) in m.iter() {
        if xi != 0 {
            out.set(xi, c / Complex64::new(0.0, xi as f64));
        }
    }
    out
}

/// Mean-zero primitive `I` with `dI/dx = |u|^2 - mu` (spectrally).
///
/// Rejects inputs whose `|u|^2 - mu` has mean larger than 1e-8, since the
/// primitive would not be periodic.
pub fn mean_zero_primitive(u: &TorusField, mu: f64) -> Result<TorusField, CoreError> {
    let mean_defect = (mass(u) / TWO_PI - mu).abs();
    if mean_defect > 1e-8 {
        return Err(CoreError::NonPeriodicPrimitive(mean_defect));
    }
    let i_spec = primitive_spectrum(u);
    let field = synthesize(&i_spec);
    Ok(TorusField::new(field.samples().iter().map(|c| Complex64::new(c.re, 0.0)).collect())
        .expect("primitive of a valid field is valid"))
}

/// Forward: `v = e^{-i I(u)} u`. Inverse: `u = e^{+i I(v)} v`, valid because
/// `|u| = |v|` pointwise so `I` is computable from either.
pub fn gauge_map(u: &TorusField, _mu: f64, direction: GaugeDirection) -> TorusField {
    let i_field = synthesize(&primitive_spectrum(u));
    let sign = match direction {
        GaugeDirection::Forward => -1.0,
        GaugeDirection::Inverse => 1.0,
    };
    let samples = u
        .samples()
        .iter()
        .zip(i_field.samples())
        .map(|(c, i)| c * Complex64::from_polar(1.0, sign * i.re))
        .collect();
    TorusField::new(samples).expect("unimodular factor preserves finiteness")
}

/// Galilean shift `tau`: forward multiplies the coefficient at `xi` by
/// `e^{-2 i xi mu t}` (this is `w = tau_{-mu} v`), inverse undoes it.
pub fn galilean_shift(spec: &Spectrum, mu: f64, t: f64, direction: GaugeDirection) -> Spectrum {
    let sign = match direction {
        GaugeDirection::Forward => -1.0,
        GaugeDirection::Inverse => 1.0,
    };
    let mut out = spec.clone();
    for xi in spec.xi_min()..=spec.xi_max() {
        let phase = Complex64::from_polar(1.0, sign * 2.0 * xi as f64 * mu * t);
        out.set(xi, spec.coeff(xi) * phase);
    }
    out
}

/// `psi(v) = (1/2pi) int [ 2 Im(conj(v)_x v) - |v|^4/2 ] dx + mu^2`.
///
/// Exposed for verifying the gauge-equation algebra; it cancels from the
/// z-equation.
pub fn psi_functional(v: &TorusField, mu: f64) -> f64 {
    let vx = synthesize(&crate::spectral::derivative(&analyze(v), 1));
    let n = v.n();
    let integral: f64 = v
        .samples()
        .iter()
        .zip(vx.samples())
        .map(|(v, vx)| {
            let im = (vx.conj() * v).im;
            2.0 * im - 0.5 * v.norm_sqr() * v.norm_sqr()
        })
        .sum::<f64>()
        * TWO_PI
        / n as f64;
    integral / TWO_PI + mu * mu
}

/// Running gauge bookkeeping: `mu`, the accumulated phase `g(t)` and the
/// trapezoidal L^4 integral it is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugeState {
    pub mu: f64,
    pub g_accum: f64,
    pub t: f64,
    pub l4_integral: f64,
    /// `||w(t)||_{L^4}^4` at the current time, carried for the trapezoid rule.
    pub last_l4: f64,
}

impl GaugeState {
    /// State at `t = 0`: `g(0) = 0`, integral empty.
    pub fn initial(mu: f64, w0: &Spectrum) -> Self {
        GaugeState { mu, g_accum: 0.0, t: 0.0, l4_integral: 0.0, last_l4: l4_fourth_power(w0) }
    }

    pub(crate) fn advanced(&self, l4_next: f64, dt: f64) -> Self {
        let l4_integral = self.l4_integral + 0.5 * dt * (self.last_l4 + l4_next);
        let t = self.t + dt;
        GaugeState {
            mu: self.mu,
            g_accum: g_coefficient() * l4_integral - self.mu * self.mu * t,
            t,
            l4_integral,
            last_l4: l4_next,
        }
    }
}

/// Advance the L^4 integral by one trapezoidal step and update `g`.
pub fn accumulate_g(state: &GaugeState, w_next: &TorusField, dt: f64) -> GaugeState {
    state.advanced(l4_fourth_power(&analyze(w_next)), dt)
}

/// Compose the full chain at the state's time: `u_to_z` applies `G`, then
/// `tau_{-mu}`, then `e^{-ig(t)}`; `z_to_u` composes the inverses in reverse.
pub fn gauge_chain(field: &TorusField, state: &GaugeState, direction: ChainDirection) -> TorusField {
    match direction {
        ChainDirection::UToZ => {
            let v = gauge_map(field, state.mu, GaugeDirection::Forward);
            let w = galilean_shift(&analyze(&v), state.mu, state.t, GaugeDirection::Forward);
            let phase = Complex64::from_polar(1.0, -state.g_accum);
            synthesize(&w.scale(phase))
        }
        ChainDirection::ZToU => {
            let zhat = analyze(field);
            let w = zhat.scale(Complex64::from_polar(1.0, state.g_accum));
            let v = galilean_shift(&w, state.mu, state.t, GaugeDirection::Inverse);
            gauge_map(&synthesize(&v), state.mu, GaugeDirection::Inverse)
        }
    }
}
