//! Residual of the integrated Duhamel identity along a stored gauge
//! trajectory:
//!
//! ```text
//!     r(t) = z(t) - e^{it dxx} z0 - 2 NF(z)(t) + 2 e^{it dxx} NF(z0)
//!            - int_0^t e^{i(t-t') dxx} N(z)(t') dt',
//! ```
//!
//! with the time integral evaluated by the composite Simpson rule on the
//! stored steps. For a trajectory that solves the gauge equation the residual
//! is zero up to integrator and quadrature error, so it decreases at fourth
//! order under dt refinement.

use num_complex::Complex64;

use super::chain::{duhamel_n, nf_exact};
use super::ComparisonRule;
use crate::error::CoreError;
use crate::evolve::{linear_propagate, Trajectory};
use crate::spectral::Spectrum;

/// Residual L^2 norms per stored time.
#[derive(Debug, Clone)]
pub struct DuhamelSeries {
    pub times: Vec<f64>,
    pub residual_l2: Vec<f64>,
}

/// Composite Simpson weights for `n` uniform intervals (n+1 points).
/// Odd interval counts use Simpson 3/8 on the final three intervals.
fn simpson_weights(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    if n == 0 {
        return w;
    }
    if n == 1 {
        return vec![0.5, 0.5];
    }
    let even_part = if n % 2 == 0 { n } else { n - 3 };
    if even_part >= 2 {
        w[0] += 1.0 / 3.0;
        for (k, wk) in w.iter_mut().enumerate().take(even_part).skip(1) {
            *wk += if k % 2 == 1 { 4.0 / 3.0 } else { 2.0 / 3.0 };
        }
        w[even_part] += 1.0 / 3.0;
    }
    if n % 2 == 1 {
        w[n - 3] += 3.0 / 8.0;
        w[n - 2] += 9.0 / 8.0;
        w[n - 1] += 9.0 / 8.0;
        w[n] += 3.0 / 8.0;
    }
    w
}

/// Evaluate the residual series for a gauge trajectory started from `z0`.
pub fn duhamel_residual(
    traj: &Trajectory,
    z0: &Spectrum,
    mu: f64,
    rule: &ComparisonRule,
) -> Result<DuhamelSeries, CoreError> {
    if traj.len() < 3 {
        return Err(CoreError::BadTrajectory("at least 3 stored steps".into()));
    }
    let h = traj.stored_dt();
    for k in 1..traj.len() {
        if ((traj.times[k] - traj.times[k - 1]) - h).abs() > 1e-9 * (1.0 + h) {
            return Err(CoreError::BadTrajectory("uniform stored spacing".into()));
        }
    }

    let integrands: Vec<Spectrum> =
        traj.spectra.iter().map(|z| duhamel_n(z, mu, rule)).collect();
    let nf0 = nf_exact(z0, rule);

    let mut times = Vec::with_capacity(traj.len());
    let mut residual_l2 = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let t = traj.times[k];
        let zt = &traj.spectra[k];
        let mut r = zt.clone();
        r = r.axpy(Complex64::new(-1.0, 0.0), &linear_propagate(z0, t));
        r = r.axpy(Complex64::new(-2.0, 0.0), &nf_exact(zt, rule));
        r = r.axpy(Complex64::new(2.0, 0.0), &linear_propagate(&nf0, t));
        if k > 0 {
            let w = simpson_weights(k);
            let mut integral = Spectrum::zeros(zt.n());
            for (j, wj) in w.iter().enumerate() {
                if *wj == 0.0 {
                    continue;
                }
                let prop = linear_propagate(&integrands[j], t - traj.times[j]);
                integral = integral.axpy(Complex64::new(wj * h, 0.0), &prop);
            }
            r = r.axpy(Complex64::new(-1.0, 0.0), &integral);
        }
        times.push(t);
        residual_l2.push(r.l2_norm());
    }
    Ok(DuhamelSeries { times, residual_l2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{evolve, EquationKind, StepperConfig};
    use crate::gauge::{gauge_chain, ChainDirection, GaugeState};
    use crate::spectral::{analyze, random_smooth, synthesize};
    use crate::TWO_PI;

    #[test]
    fn simpson_weights_integrate_cubics() {
        // composite Simpson is exact on t^3 over any even interval count
        for n in [2usize, 4, 6, 7, 9] {
            let w = simpson_weights(n);
            let h = 1.0 / n as f64;
            let integral: f64 =
                w.iter().enumerate().map(|(k, wk)| wk * h * (k as f64 * h).powi(3)).sum();
            assert!((integral - 0.25).abs() < 1e-12, "n={n}: {integral}");
        }
    }

    #[test]
    fn zero_data_zero_residual() {
        let z0 = Spectrum::zeros(16);
        let cfg = StepperConfig::new(1e-2, 0.1, EquationKind::Gauge);
        let traj = evolve(&z0, &cfg, 0.0).unwrap();
        let rule = ComparisonRule::default();
        let series = duhamel_residual(&traj, &z0, 0.0, &rule).unwrap();
        assert!(series.residual_l2.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn short_trajectory_rejected() {
        let z0 = random_smooth(1, 16, 0.5, 0.2);
        let cfg = StepperConfig::new(0.05, 0.1, EquationKind::Gauge);
        let traj = evolve(&z0, &cfg, z0.l2_norm_sq() / TWO_PI).unwrap();
        assert_eq!(traj.len(), 3);
        let rule = ComparisonRule::default();
        assert!(duhamel_residual(&traj, &z0, 0.0, &rule).is_ok());
        let mut short = traj.clone();
        short.times.truncate(2);
        short.spectra.truncate(2);
        assert!(duhamel_residual(&short, &z0, 0.0, &rule).is_err());
    }

    #[test]
    fn plane_wave_residual_tiny() {
        // single mode: all constrained sums collapse; residual is quadrature floor
        let u0 = Spectrum::single_mode(16, 1, Complex64::new(1.0, 0.0));
        let mu = u0.l2_norm_sq() / TWO_PI;
        let z0 = analyze(&gauge_chain(
            &synthesize(&u0),
            &GaugeState::initial(mu, &u0),
            ChainDirection::UToZ,
        ));
        let cfg = StepperConfig::new(1e-3, 0.2, EquationKind::Gauge);
        let traj = evolve(&z0, &cfg, mu).unwrap();
        let rule = ComparisonRule::default();
        let series = duhamel_residual(&traj, &z0, mu, &rule).unwrap();
        let max = series.residual_l2.iter().cloned().fold(0.0, f64::max);
        assert!(max < 1e-8, "plane-wave residual {max}");
    }

    #[test]
    fn residual_converges_under_dt_halving() {
        let u0 = random_smooth(11, 16, 1.2, 0.35);
        let mu = u0.l2_norm_sq() / TWO_PI;
        let z0 = analyze(&gauge_chain(
            &synthesize(&u0),
            &GaugeState::initial(mu, &u0),
            ChainDirection::UToZ,
        ));
        let rule = ComparisonRule::default();
        let max_res = |dt: f64| {
            let cfg = StepperConfig::new(dt, 0.1, EquationKind::Gauge);
            let traj = evolve(&z0, &cfg, mu).unwrap();
            let series = duhamel_residual(&traj, &z0, mu, &rule).unwrap();
            series.residual_l2.iter().cloned().fold(0.0, f64::max)
        };
        let coarse = max_res(4e-3);
        let fine = max_res(2e-3);
        assert!(
            coarse / fine > 4.0,
            "residual must decrease at >= 2nd order: {coarse:.3e} -> {fine:.3e}"
        );
    }
}
