//! Time integration of the dNLS and gauge flows in spectral form.
//!
//! Both equations share the linear part `d_t zhat = -i xi^2 zhat + G(zhat)`;
//! the integrating-factor RK4 scheme steps the interaction variable
//! `y = e^{i xi^2 t} zhat`, so the stiff linear phase is applied exactly and
//! the classical 4-stage rule only sees the nonlinearity. With
//! `E = e^{-i xi^2 h/2}`:
//!
//! ```text
//!     a = G(u_n)                    b = G(E (u_n + h/2 a))
//!     c = G(E u_n + h/2 b)          d = G(E (E u_n + h c))
//!     u_{n+1} = E^2 u_n + h/6 (E^2 a + 2 E (b + c) + d)
//! ```

use num_complex::Complex64;

use crate::conserved::ConservedTriple;
use crate::error::CoreError;
use crate::gauge::GaugeState;
use crate::spectral::{derivative, multiply_dealiased, synthesize, Spectrum};
use crate::terms::{gauge_rhs, ComparisonRule, RhsMode};

/// Which flow to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationKind {
    Dnls,
    Gauge,
}

/// Integrator configuration.
#[derive(Debug, Clone, Copy)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_final: f64,
    pub store_every: usize,
    pub equation: EquationKind,
    pub rule: ComparisonRule,
    pub rhs_mode: RhsMode,
    /// When set, the run is retried with `dt/2` (up to three times) if the
    /// relative mass drift per unit time exceeds this threshold.
    pub mass_drift_guard: Option<f64>,
}

impl StepperConfig {
    pub fn new(dt: f64, t_final: f64, equation: EquationKind) -> Self {
        StepperConfig {
            dt,
            t_final,
            store_every: 1,
            equation,
            rule: ComparisonRule::default(),
            rhs_mode: RhsMode::Fast,
            mass_drift_guard: None,
        }
    }

    fn validate(&self) -> Result<(), CoreError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(CoreError::InvalidStepper(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final > 0.0) || self.dt > self.t_final {
            return Err(CoreError::InvalidStepper(format!(
                "need 0 < dt <= T (dt = {}, T = {})",
                self.dt, self.t_final
            )));
        }
        if self.store_every == 0 {
            return Err(CoreError::InvalidStepper("store_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Time-stamped sequence of spectra plus monitor series.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub spectra: Vec<Spectrum>,
    pub monitors: Vec<ConservedTriple>,
    /// Gauge bookkeeping per stored time (gauge runs only).
    pub gauge_states: Option<Vec<GaugeState>>,
    /// The dt actually used (after any mass-drift halvings).
    pub dt_used: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Spacing of the stored samples (uniform by construction).
    pub fn stored_dt(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }

    pub fn final_spectrum(&self) -> &Spectrum {
        self.spectra.last().expect("trajectory is never empty")
    }
}

/// Free propagator: coefficient at `xi` multiplied by `e^{-i xi^2 t}`.
pub fn linear_propagate(spec: &Spectrum, t: f64) -> Spectrum {
    let mut out = spec.clone();
    for xi in spec.xi_min()..=spec.xi_max() {
        let phase = Complex64::from_polar(1.0, -(xi as f64) * (xi as f64) * t);
        out.set(xi, spec.coeff(xi) * phase);
    }
    out
}

/// Spectrum of `d_x(|u|^2 u)`; the `i u_xx` part is handled by the
/// integrating factor, not here.
pub fn dnls_rhs(u: &Spectrum) -> Spectrum {
    let cubic = multiply_dealiased(&[(u, false), (u, true), (u, false)])
        .expect("arity 3 on matching grids");
    derivative(&cubic, 1)
}

fn rhs(equation: EquationKind, z: &Spectrum, mu: f64, rule: &ComparisonRule, mode: RhsMode) -> Spectrum {
    match equation {
        EquationKind::Dnls => dnls_rhs(z),
        EquationKind::Gauge => gauge_rhs(z, mu, rule, mode),
    }
}

fn half_propagator(n: usize, dt: f64) -> Vec<Complex64> {
    let half = n as i64 / 2;
    (0..n)
        .map(|i| {
            let xi = (i as i64 - half) as f64;
            Complex64::from_polar(1.0, -xi * xi * dt / 2.0)
        })
        .collect()
}

fn apply(e: &[Complex64], s: &Spectrum) -> Spectrum {
    let coeffs = s.coeffs().iter().zip(e).map(|(c, p)| c * p).collect();
    Spectrum::new(coeffs).expect("same grid")
}

fn lincomb(base: &Spectrum, scale: f64, delta: &Spectrum) -> Spectrum {
    base.axpy(Complex64::new(scale, 0.0), delta)
}

/// Integrate the chosen flow from `init`. For gauge runs `mu` is the
/// (conserved) `||u_0||^2 / 2pi` of the underlying dNLS datum; for dNLS runs
/// it is ignored.
pub fn evolve(init: &Spectrum, cfg: &StepperConfig, mu: f64) -> Result<Trajectory, CoreError> {
    cfg.validate()?;
    let mut attempt = *cfg;
    let mut halvings = 0;
    loop {
        let traj = evolve_once(init, &attempt, mu)?;
        if let Some(guard) = cfg.mass_drift_guard {
            let m0 = traj.monitors.first().map(|m| m.mass).unwrap_or(0.0);
            let drift = traj
                .monitors
                .iter()
                .map(|m| (m.mass - m0).abs())
                .fold(0.0, f64::max);
            let rel = if m0 > 0.0 { drift / m0 } else { drift };
            if rel > guard * cfg.t_final && halvings < 3 {
                halvings += 1;
                attempt.dt /= 2.0;
                continue;
            }
        }
        return Ok(traj);
    }
}

fn evolve_once(init: &Spectrum, cfg: &StepperConfig, mu: f64) -> Result<Trajectory, CoreError> {
    let n = init.n();
    let nsteps = (cfg.t_final / cfg.dt).round() as usize;
    let nsteps = nsteps.max(1);
    let dt = cfg.t_final / nsteps as f64;
    let e = half_propagator(n, dt);
    let e2: Vec<Complex64> = e.iter().map(|p| p * p).collect();

    let is_gauge = cfg.equation == EquationKind::Gauge;
    let mut z = init.clone();
    let mut gauge_state = is_gauge.then(|| GaugeState::initial(mu, init));

    let mut times = vec![0.0];
    let mut spectra = vec![init.clone()];
    let mut monitors = vec![ConservedTriple::of(&synthesize(init))];
    let mut gauge_states = gauge_state.map(|s| vec![s]);

    for step in 1..=nsteps {
        let a = rhs(cfg.equation, &z, mu, &cfg.rule, cfg.rhs_mode);
        let b = rhs(cfg.equation, &apply(&e, &lincomb(&z, dt / 2.0, &a)), mu, &cfg.rule, cfg.rhs_mode);
        let c = rhs(
            cfg.equation,
            &lincomb(&apply(&e, &z), dt / 2.0, &b),
            mu,
            &cfg.rule,
            cfg.rhs_mode,
        );
        let ez = apply(&e, &z);
        let d = rhs(cfg.equation, &apply(&e, &lincomb(&ez, dt, &c)), mu, &cfg.rule, cfg.rhs_mode);

        let mut next = apply(&e2, &z);
        next = next.axpy(Complex64::new(dt / 6.0, 0.0), &apply(&e2, &a));
        next = next.axpy(Complex64::new(dt / 3.0, 0.0), &apply(&e, &b));
        next = next.axpy(Complex64::new(dt / 3.0, 0.0), &apply(&e, &c));
        next = next.axpy(Complex64::new(dt / 6.0, 0.0), &d);

        if !next.is_finite() {
            return Err(CoreError::NumericalAbort { last_valid_time: (step - 1) as f64 * dt });
        }
        z = next;

        if let Some(state) = gauge_state.as_mut() {
            // |w| = |z| pointwise, so the L^4 integrand of g can be read off z
            *state = state.advanced(crate::spectral::l4_fourth_power(&z), dt);
        }

        if step % cfg.store_every == 0 || step == nsteps {
            times.push(step as f64 * dt);
            spectra.push(z.clone());
            monitors.push(ConservedTriple::of(&synthesize(&z)));
            if let (Some(list), Some(state)) = (gauge_states.as_mut(), gauge_state.as_ref()) {
                list.push(*state);
            }
        }
    }

    Ok(Trajectory { times, spectra, monitors, gauge_states, dt_used: dt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{gauge_chain, ChainDirection, GaugeState};
    use crate::spectral::{analyze, random_smooth, sobolev_norm};
    use crate::TWO_PI;

    fn plane_wave_spec(n: usize, k: i64, amp: f64) -> Spectrum {
        Spectrum::single_mode(n, k, Complex64::new(amp, 0.0))
    }

    /// dnls plane wave: u = A e^{i(kx + (|A|^2 k - k^2) t)}.
    fn exact_plane_wave(n: usize, k: i64, amp: f64, t: f64) -> Spectrum {
        let omega = amp * amp * k as f64 - (k * k) as f64;
        plane_wave_spec(n, k, amp).scale(Complex64::from_polar(1.0, omega * t))
    }

    #[test]
    fn linear_propagate_examples() {
        let spec = random_smooth(1, 16, 0.3, 1.0);
        let same = linear_propagate(&spec, 0.0);
        assert_eq!(spec.coeffs(), same.coeffs());
        let m1 = plane_wave_spec(16, 1, 1.0);
        let rotated = linear_propagate(&m1, TWO_PI);
        assert!((rotated.coeff(1) - m1.coeff(1)).norm() < 1e-12);
        for s in [0.0, 0.7, 2.0] {
            assert!(
                (sobolev_norm(&linear_propagate(&spec, 0.37), s) - sobolev_norm(&spec, s)).abs()
                    < 1e-13
            );
        }
    }

    #[test]
    fn dnls_rhs_plane_wave() {
        // |u|^2 u = u for e^{ix}, then d_x gives i e^{ix}
        let u = plane_wave_spec(32, 1, 1.0);
        let r = dnls_rhs(&u);
        let want = u.coeff(1) * Complex64::new(0.0, 1.0);
        assert!((r.coeff(1) - want).norm() < 1e-12);
        assert_eq!(dnls_rhs(&Spectrum::zeros(16)).l2_norm(), 0.0);
    }

    #[test]
    fn dnls_rhs_matches_direct_convolution() {
        // real even data: the cubic power is real, so the derivative's
        // spectrum is Hermitian; both checked against the O(N^3) convolution
        let n = 16usize;
        let half = n as i64 / 2;
        let mut u = Spectrum::zeros(n);
        for xi in 0..4i64 {
            let c = Complex64::new(0.3 / (1.0 + xi as f64), 0.0);
            u.set(xi, c);
            if xi > 0 {
                u.set(-xi, c);
            }
        }
        let fast = dnls_rhs(&u);
        let mut direct = Spectrum::zeros(n);
        for xo in -half..half {
            let mut acc = Complex64::ZERO;
            for x1 in -half..half {
                for x2 in -half..half {
                    let x3 = xo - x1 + x2;
                    if x3 < -half || x3 >= half {
                        continue;
                    }
                    acc += u.coeff(x1) * u.coeff(x2).conj() * u.coeff(x3);
                }
            }
            // two 1/sqrt(2pi) convolution weights, then the derivative
            direct.set(xo, acc / TWO_PI * Complex64::new(0.0, xo as f64));
        }
        for (a, b) in fast.coeffs().iter().zip(direct.coeffs()) {
            assert!((a - b).norm() < 1e-12, "convolution oracle mismatch");
        }
        for xi in 1..half {
            assert!(
                (fast.coeff(-xi) - fast.coeff(xi).conj()).norm() < 1e-12,
                "derivative of a real cubic power must have Hermitian spectrum"
            );
        }
    }

    #[test]
    fn plane_wave_evolution_is_exact() {
        for (amp, k) in [(1.0, 1i64), (1.0, 2), (0.5, 3)] {
            let init = plane_wave_spec(64, k, amp);
            let cfg = StepperConfig::new(1e-3, 1.0, EquationKind::Dnls);
            let traj = evolve(&init, &cfg, 0.0).unwrap();
            let got = traj.final_spectrum();
            let want = exact_plane_wave(64, k, amp, 1.0);
            let err = got
                .coeffs()
                .iter()
                .zip(want.coeffs())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / want.l2_norm();
            assert!(err < 1e-8, "plane wave (A={amp}, k={k}) error {err}");
        }
    }

    #[test]
    fn zero_init_zero_trajectory() {
        let cfg = StepperConfig::new(1e-2, 0.1, EquationKind::Gauge);
        let traj = evolve(&Spectrum::zeros(16), &cfg, 0.0).unwrap();
        for s in &traj.spectra {
            assert_eq!(s.l2_norm(), 0.0);
        }
    }

    #[test]
    fn rk4_order_on_gauge_flow() {
        // dt-refinement order ~ 4 measured against a fine reference
        let u0 = random_smooth(5, 32, 0.8, 0.4);
        let mu = u0.l2_norm_sq() / TWO_PI;
        let z0 = analyze(&gauge_chain(
            &synthesize(&u0),
            &GaugeState::initial(mu, &u0),
            ChainDirection::UToZ,
        ));
        let run = |dt: f64| {
            let cfg = StepperConfig { store_every: usize::MAX, ..StepperConfig::new(dt, 0.25, EquationKind::Gauge) };
            evolve(&z0, &cfg, mu).unwrap().final_spectrum().clone()
        };
        let reference = run(1.0 / 2048.0);
        let errs: Vec<f64> = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0]
            .iter()
            .map(|&dt| {
                let got = run(dt);
                got.coeffs()
                    .iter()
                    .zip(reference.coeffs())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(
            order1 > 3.8 && order2 > 3.8,
            "measured orders {order1:.2}, {order2:.2} (errors {errs:?})"
        );
    }

    #[test]
    fn conservation_drift_small_data() {
        let u0 = random_smooth(9, 64, 0.5, 0.45);
        let cfg = StepperConfig {
            store_every: 100,
            ..StepperConfig::new(1e-3, 1.0, EquationKind::Dnls)
        };
        let traj = evolve(&u0, &cfg, 0.0).unwrap();
        let first = traj.monitors[0];
        for m in &traj.monitors {
            assert!((m.mass - first.mass).abs() / first.mass < 1e-10, "mass drift");
            assert!(
                (m.momentum - first.momentum).abs() / (1.0 + first.momentum.abs()) < 1e-8,
                "momentum drift"
            );
            assert!(
                (m.energy - first.energy).abs() / (1.0 + first.energy.abs()) < 1e-8,
                "energy drift"
            );
        }
    }

    #[test]
    fn nan_aborts_with_last_valid_time() {
        // large data and huge dt blow up the cubic term quickly
        let init = random_smooth(2, 16, 0.05, 80.0);
        let cfg = StepperConfig::new(0.5, 5.0, EquationKind::Dnls);
        match evolve(&init, &cfg, 0.0) {
            Err(CoreError::NumericalAbort { last_valid_time }) => {
                assert!(last_valid_time >= 0.0 && last_valid_time < 5.0);
            }
            other => panic!("expected numerical abort, got {:?}", other.map(|t| t.len())),
        }
    }

    #[test]
    fn config_validation() {
        assert!(evolve(&Spectrum::zeros(16), &StepperConfig::new(0.0, 1.0, EquationKind::Dnls), 0.0).is_err());
        assert!(evolve(&Spectrum::zeros(16), &StepperConfig::new(2.0, 1.0, EquationKind::Dnls), 0.0).is_err());
        let mut cfg = StepperConfig::new(0.1, 1.0, EquationKind::Dnls);
        cfg.store_every = 0;
        assert!(evolve(&Spectrum::zeros(16), &cfg, 0.0).is_err());
    }
}
