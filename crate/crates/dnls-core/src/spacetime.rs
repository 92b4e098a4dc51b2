//! Discretized Bourgain-space norms on time-windowed fields.
//!
//! A [`SpacetimeField`] holds `f(xi, t_k)` on the extended uniform grid
//! `t_k = -2T + 4T k / Nt`; by construction the values vanish for
//! `|t| >= 2T` (the support of the window `eta_T`). The temporal transform
//! follows the `1/sqrt(2pi)` convention, and
//!
//! ```text
//!     ||f||_{X^{s,b}} = || <xi>^s <tau + xi^2>^b ftilde ||_{l^2_xi L^2_tau}
//!     ||f||_{Y^{s,b}} = || <xi>^s <tau + xi^2>^b ftilde ||_{l^2_xi L^1_tau}
//!     ||f||_{Z^s}     = ||f||_{X^{s,1/2}} + ||f||_{Y^{s,0}}
//! ```
//!
//! with the continuous `tau` replaced by the discrete dual grid of the
//! extended interval. Embedding checks against these norms are falsification
//! trials with grid-dependent constants, never assertions of the continuum
//! inequalities with a specific constant.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::evolve::{linear_propagate, Trajectory};
use crate::spectral::{bracket, fft_in_place, synthesize, Spectrum};
use crate::{SQRT_2PI, TWO_PI};

/// The fixed window profile: `eta = 1` on `[-1,1]`, smoothly decayed on
/// `1 < |t| < 2` via `exp(1 - 1/(1 - (|t|-1)^2))`, zero beyond.
pub fn eta(t: f64) -> f64 {
    let u = t.abs();
    if u <= 1.0 {
        1.0
    } else if u >= 2.0 {
        0.0
    } else {
        let w = u - 1.0;
        (1.0 - 1.0 / (1.0 - w * w)).exp()
    }
}

/// Rescaled window `eta_T(t) = eta(t/T)`.
#[derive(Debug, Clone, Copy)]
pub struct WindowFn {
    pub t_param: f64,
}

impl WindowFn {
    pub fn new(t_param: f64) -> Self {
        WindowFn { t_param }
    }

    pub fn apply(&self, t: f64) -> f64 {
        eta(t / self.t_param)
    }
}

/// Complex samples on (frequency, time) over the extended interval
/// `[-2T, 2T)`, row-major in `xi`.
#[derive(Debug, Clone)]
pub struct SpacetimeField {
    nx: usize,
    nt: usize,
    t_window: f64,
    values: Vec<Complex64>,
}

impl SpacetimeField {
    pub fn zeros(nx: usize, nt: usize, t_window: f64) -> Self {
        SpacetimeField { nx, nt, t_window, values: vec![Complex64::ZERO; nx * nt] }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn t_window(&self) -> f64 {
        self.t_window
    }

    /// Time-grid spacing `4T / Nt`.
    pub fn dt(&self) -> f64 {
        4.0 * self.t_window / self.nt as f64
    }

    /// `t_k = -2T + k dt`.
    pub fn time(&self, k: usize) -> f64 {
        -2.0 * self.t_window + self.dt() * k as f64
    }

    #[inline]
    fn idx(&self, xi: i64, k: usize) -> usize {
        ((xi + self.nx as i64 / 2) as usize) * self.nt + k
    }

    pub fn value(&self, xi: i64, k: usize) -> Complex64 {
        self.values[self.idx(xi, k)]
    }

    pub fn set(&mut self, xi: i64, k: usize, v: Complex64) {
        let i = self.idx(xi, k);
        self.values[i] = v;
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Spatial spectrum at one time sample.
    pub fn column(&self, k: usize) -> Spectrum {
        let mut s = Spectrum::zeros(self.nx);
        for xi in -(self.nx as i64) / 2..self.nx as i64 / 2 {
            s.set(xi, self.value(xi, k));
        }
        s
    }

    pub fn set_column(&mut self, k: usize, spec: &Spectrum) {
        for (xi, c) in spec.iter() {
            self.set(xi, k, c);
        }
    }

    /// Temporal transform of one frequency row:
    /// `ftilde(xi, tau_m) = (dt/sqrt(2pi)) sum_k e^{-i t_k tau_m} f(xi, t_k)`,
    /// returned in ascending `m` with `tau_m = 2pi m / 4T`, `m in [-Nt/2, Nt/2)`.
    pub fn row_transform(&self, xi: i64) -> Vec<Complex64> {
        let nt = self.nt;
        let mut buf: Vec<Complex64> = (0..nt).map(|k| self.values[self.idx(xi, k)]).collect();
        fft_in_place(&mut buf, false);
        let scale = self.dt() / SQRT_2PI;
        // the grid offset t_0 = -2T contributes a phase (-1)^m per dual index
        let mut out = vec![Complex64::ZERO; nt];
        for (m, v) in buf.iter().enumerate() {
            let m_signed = if m < nt / 2 { m as i64 } else { m as i64 - nt as i64 };
            let sign = if m_signed.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            out[(m_signed + nt as i64 / 2) as usize] = v * scale * sign;
        }
        out
    }

    /// Dual-grid frequency `tau_m` for ascending index `i`.
    pub fn tau(&self, i: usize) -> f64 {
        let m = i as i64 - self.nt as i64 / 2;
        TWO_PI * m as f64 / (4.0 * self.t_window)
    }
}

/// Build the windowed extension of a trajectory: samples inside the stored
/// range come from the trajectory, negative times and times beyond it are
/// filled by linear (free) propagation from the nearest endpoint, and the
/// whole field is multiplied by `eta_T`.
pub fn window_extend(
    traj: &Trajectory,
    t_window: f64,
    nt: usize,
) -> Result<SpacetimeField, CoreError> {
    if !nt.is_power_of_two() || nt < 8 {
        return Err(CoreError::BadTrajectory(format!("Nt = {nt} must be a power of two >= 8")));
    }
    if traj.len() < 2 {
        return Err(CoreError::BadTrajectory("at least 2 stored steps".into()));
    }
    let t_end = *traj.times.last().unwrap();
    if t_end + 1e-12 < t_window {
        return Err(CoreError::BadTrajectory(format!(
            "trajectory covers [0, {t_end}], window needs [0, {t_window}]"
        )));
    }
    let h = traj.stored_dt();
    let dt = 4.0 * t_window / nt as f64;
    let ratio = dt / h;
    let m = ratio.round() as usize;
    if m == 0 || (ratio - m as f64).abs() > 1e-9 {
        return Err(CoreError::BadTrajectory(format!(
            "stored spacing {h} must divide the window grid spacing {dt}"
        )));
    }

    let nx = traj.spectra[0].n();
    let window = WindowFn::new(t_window);
    let mut field = SpacetimeField::zeros(nx, nt, t_window);
    let z_first = &traj.spectra[0];
    let z_last = traj.spectra.last().unwrap();
    for k in 0..nt {
        let t = field.time(k);
        let w = window.apply(t);
        if w == 0.0 {
            continue;
        }
        let spec = if t < 0.0 {
            linear_propagate(z_first, t)
        } else if t <= t_end + 1e-12 {
            let j = ((t / h).round() as usize).min(traj.len() - 1);
            if (t - traj.times[j]).abs() > 1e-9 * (1.0 + h) {
                return Err(CoreError::BadTrajectory(
                    "window grid does not align with stored times".into(),
                ));
            }
            traj.spectra[j].clone()
        } else {
            linear_propagate(z_last, t - t_end)
        };
        field.set_column(k, &spec.scale(Complex64::new(w, 0.0)));
    }
    Ok(field)
}

/// Windowed free evolution `eta_T(t) e^{it dxx} z0`, the canonical linear
/// test field.
pub fn window_free_solution(z0: &Spectrum, t_window: f64, nt: usize) -> SpacetimeField {
    let mut field = SpacetimeField::zeros(z0.n(), nt, t_window);
    let window = WindowFn::new(t_window);
    for k in 0..nt {
        let t = field.time(k);
        let w = window.apply(t);
        if w == 0.0 {
            continue;
        }
        field.set_column(k, &linear_propagate(z0, t).scale(Complex64::new(w, 0.0)));
    }
    field
}

/// Which space-time norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpacetimeNormKind {
    X { s: f64, b: f64 },
    Y { s: f64, b: f64 },
    Z { s: f64 },
}

/// Evaluate the requested norm on the discrete dual grid.
pub fn spacetime_norm(f: &SpacetimeField, kind: SpacetimeNormKind) -> f64 {
    match kind {
        SpacetimeNormKind::X { s, b } => {
            let dtau = TWO_PI / (4.0 * f.t_window);
            let mut total = 0.0;
            for xi in -(f.nx as i64) / 2..f.nx as i64 / 2 {
                let row = f.row_transform(xi);
                let xisq = (xi * xi) as f64;
                let mut acc = 0.0;
                for (i, v) in row.iter().enumerate() {
                    let w = 1.0 + (f.tau(i) + xisq).powi(2);
                    acc += w.powf(b) * v.norm_sqr();
                }
                total += bracket(xi).powf(2.0 * s) * acc * dtau;
            }
            total.sqrt()
        }
        SpacetimeNormKind::Y { s, b } => {
            let dtau = TWO_PI / (4.0 * f.t_window);
            let mut total = 0.0;
            for xi in -(f.nx as i64) / 2..f.nx as i64 / 2 {
                let row = f.row_transform(xi);
                let xisq = (xi * xi) as f64;
                let mut acc = 0.0;
                for (i, v) in row.iter().enumerate() {
                    let w = 1.0 + (f.tau(i) + xisq).powi(2);
                    acc += w.powf(b / 2.0) * v.norm() * dtau;
                }
                total += bracket(xi).powf(2.0 * s) * acc * acc;
            }
            total.sqrt()
        }
        SpacetimeNormKind::Z { s } => {
            spacetime_norm(f, SpacetimeNormKind::X { s, b: 0.5 })
                + spacetime_norm(f, SpacetimeNormKind::Y { s, b: 0.0 })
        }
    }
}

/// Mixed `L^p_t L^q_x` norm by quadrature on the extended grid;
/// `f64::INFINITY` is accepted in either slot.
pub fn mixed_lp_norm(f: &SpacetimeField, p: f64, q: f64) -> Result<f64, CoreError> {
    if !(p >= 1.0) {
        return Err(CoreError::InvalidLebesgueExponent(p));
    }
    if !(q >= 1.0) {
        return Err(CoreError::InvalidLebesgueExponent(q));
    }
    let dx = TWO_PI / f.nx as f64;
    let dt = f.dt();
    let mut outer = 0.0f64;
    for k in 0..f.nt {
        let phys = synthesize(&f.column(k));
        let inner = if q.is_infinite() {
            phys.samples().iter().map(|c| c.norm()).fold(0.0, f64::max)
        } else {
            (phys.samples().iter().map(|c| c.norm().powf(q)).sum::<f64>() * dx).powf(1.0 / q)
        };
        if p.is_infinite() {
            outer = outer.max(inner);
        } else {
            outer += inner.powf(p) * dt;
        }
    }
    Ok(if p.is_infinite() { outer } else { outer.powf(1.0 / p) })
}
