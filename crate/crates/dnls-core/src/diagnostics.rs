//! Headline experiments and the inequality-falsification harness.
//!
//! * [`smoothing_series`] measures the nonlinear-smoothing residual
//!   `||z(t) - e^{it dxx} z0||_{H^{s+a}}` along a gauge trajectory, and
//!   [`smoothing_signature`] runs the grid-doubling experiment: borderline
//!   `H^s` data whose `H^{s+a}` norm diverges with `N` while the residual
//!   norm stays flat — the measured slope separation is the computable shadow
//!   of the smoothing effect.
//! * [`growth_series`] tracks `||u(t)||_{H^s}` against the reference envelope
//!   `<t>^{2(s-1)+eps}`, and [`freq_split_series`] the `Q_{<= n^2}` /
//!   `Q_{> n^2}` split at block boundaries.
//! * [`inequality_trial`] samples random inputs for one of the named
//!   estimates and records the ratio LHS/RHS per grid size. A report is
//!   FALSIFIED only when the max ratio grows monotonically by more than 2x
//!   per doubling across at least three doublings; constants themselves are
//!   grid artifacts and are recorded, not asserted.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::str::FromStr;

use crate::error::CoreError;
use crate::evolve::{evolve, linear_propagate, EquationKind, StepperConfig, Trajectory};
use crate::gauge::{gauge_chain, ChainDirection, GaugeState};
use crate::spectral::{
    analyze, band_select, bracket, multiply_dealiased, random_hs, sobolev_norm, synthesize,
    BandSelector, Spectrum,
};
use crate::spacetime::{
    mixed_lp_norm, spacetime_norm, window_extend, window_free_solution, SpacetimeField,
    SpacetimeNormKind, WindowFn,
};
use crate::terms::{eval_term, ComparisonRule, TermKind};
use crate::TWO_PI;

// ---------------------------------------------------------------------------
// Nonlinear smoothing
// ---------------------------------------------------------------------------

/// Parameters of the smoothing experiment:
/// `0 < a < min(s - 1/2 - eps, 1/2 - eps)`, `sigma = min(s, 1)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmoothingParams {
    pub s: f64,
    pub a: f64,
    pub epsilon: f64,
    pub sigma: f64,
}

impl SmoothingParams {
    pub fn new(s: f64, a: f64, epsilon: f64) -> Result<Self, CoreError> {
        let cap = (s - 0.5 - epsilon).min(0.5 - epsilon);
        if !(a > 0.0 && a < cap) {
            return Err(CoreError::InvalidSmoothingParams(format!(
                "need 0 < a < min(s-1/2-eps, 1/2-eps) = {cap}, got a = {a}"
            )));
        }
        Ok(SmoothingParams { s, a, epsilon, sigma: s.min(1.0) })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmoothingPoint {
    pub t: f64,
    pub residual_norm: f64,
    pub data_norm: f64,
}

/// Per stored time: `||z(t) - e^{it dxx} z0||_{H^{s+a}}` and `||z0||_{H^s}`.
pub fn smoothing_series(
    traj: &Trajectory,
    z0: &Spectrum,
    params: &SmoothingParams,
) -> Result<Vec<SmoothingPoint>, CoreError> {
    let first = &traj.spectra[0];
    let defect: f64 = first
        .coeffs()
        .iter()
        .zip(z0.coeffs())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if defect > 1e-12 {
        return Err(CoreError::BadTrajectory("starts at z0".into()));
    }
    let data_norm = sobolev_norm(z0, params.s);
    Ok(traj
        .times
        .iter()
        .zip(&traj.spectra)
        .map(|(&t, zt)| {
            let lin = linear_propagate(z0, t);
            let resid = zt.axpy(Complex64::new(-1.0, 0.0), &lin);
            SmoothingPoint { t, residual_norm: sobolev_norm(&resid, params.s + params.a), data_norm }
        })
        .collect())
}

/// Result of the grid-doubling smoothing experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SmoothingSignature {
    pub sizes: Vec<usize>,
    pub data_norms: Vec<f64>,
    pub residual_norms: Vec<f64>,
    /// Least-squares slope of `log ||z0||_{H^{s+a}}` against `log N`.
    pub data_slope: f64,
    pub residual_slope: f64,
    pub separation: f64,
}

fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Run the smoothing-signature experiment: for each grid size, generate
/// borderline `H^s` data with `random_hs`, rescale to the requested mass,
/// evolve the gauge flow to `t_final` and compare slopes of the `H^{s+a}`
/// data norm and the smoothing residual.
#[allow(clippy::too_many_arguments)]
pub fn smoothing_signature(
    s: f64,
    a: f64,
    margin: f64,
    t_final: f64,
    dt: f64,
    sizes: &[usize],
    seed: u64,
    l2_mass: f64,
) -> Result<SmoothingSignature, CoreError> {
    let params = SmoothingParams::new(s, a, margin)?;
    let mut data_norms = Vec::new();
    let mut residual_norms = Vec::new();
    for &n in sizes {
        let raw = random_hs(seed, s, n, margin);
        let z0 = raw.scale(Complex64::new(l2_mass / raw.l2_norm(), 0.0));
        let mu = z0.l2_norm_sq() / TWO_PI;
        let cfg = StepperConfig {
            store_every: usize::MAX,
            ..StepperConfig::new(dt, t_final, EquationKind::Gauge)
        };
        let traj = evolve(&z0, &cfg, mu)?;
        let series = smoothing_series(&traj, &z0, &params)?;
        let last = series.last().expect("trajectory is never empty");
        data_norms.push(sobolev_norm(&z0, s + a));
        residual_norms.push(last.residual_norm);
    }
    let ln: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let data_slope = lsq_slope(&ln, &data_norms.iter().map(|v| v.ln()).collect::<Vec<_>>());
    let residual_slope =
        lsq_slope(&ln, &residual_norms.iter().map(|v| v.max(1e-300).ln()).collect::<Vec<_>>());
    Ok(SmoothingSignature {
        sizes: sizes.to_vec(),
        data_norms,
        residual_norms,
        data_slope,
        residual_slope,
        separation: data_slope - residual_slope,
    })
}

// ---------------------------------------------------------------------------
// Polynomial growth tracking
// ---------------------------------------------------------------------------

/// Parameters of the growth tracker: `s >= 1`, `eps in (0, 1/2)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthParams {
    pub s: f64,
    pub epsilon: f64,
    pub t_block: f64,
}

impl GrowthParams {
    pub fn new(s: f64, epsilon: f64, t_block: f64) -> Result<Self, CoreError> {
        if s < 1.0 || !(epsilon > 0.0 && epsilon < 0.5) || !(t_block > 0.0) {
            return Err(CoreError::InvalidSmoothingParams(format!(
                "growth params need s >= 1, eps in (0, 1/2), T_block > 0; got s={s}, eps={epsilon}"
            )));
        }
        Ok(GrowthParams { s, epsilon, t_block })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthPoint {
    pub t: f64,
    pub hs_norm: f64,
    pub envelope: f64,
}

/// `||u(t)||_{H^s}` against the envelope `<t>^{2(s-1)+eps}`, normalized to
/// match at `t = 0`.
pub fn growth_series(traj: &Trajectory, params: &GrowthParams) -> Vec<GrowthPoint> {
    let expo = 2.0 * (params.s - 1.0) + params.epsilon;
    let base = sobolev_norm(&traj.spectra[0], params.s);
    traj.times
        .iter()
        .zip(&traj.spectra)
        .map(|(&t, sp)| GrowthPoint {
            t,
            hs_norm: sobolev_norm(sp, params.s),
            envelope: base * (1.0 + t * t).powf(expo / 2.0),
        })
        .collect()
}

/// Least-squares fit of `log ||u(t)||_{H^s}` against `log <t>` over `t >= 1`:
/// the measured growth exponent (0 for bounded orbits, to be compared with
/// the reference `2(s-1)+eps`).
pub fn measured_growth_exponent(traj: &Trajectory, s: f64) -> f64 {
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.spectra)
        .filter(|(t, _)| **t >= 1.0)
        .map(|(&t, sp)| ((1.0 + t * t).sqrt().ln(), sobolev_norm(sp, s).max(1e-300).ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    lsq_slope(&xs, &ys)
}

/// Maximum of `||u||_{H^s} / <t>^{2(s-1)+eps}` over each unit time interval.
pub fn unit_interval_maxima(traj: &Trajectory, s: f64, epsilon: f64) -> Vec<f64> {
    let expo = 2.0 * (s - 1.0) + epsilon;
    let t_end = *traj.times.last().unwrap();
    let blocks = t_end.ceil() as usize;
    let mut out = vec![0.0f64; blocks.max(1)];
    for (&t, sp) in traj.times.iter().zip(&traj.spectra) {
        let ratio = sobolev_norm(sp, s) / (1.0 + t * t).powf(expo / 2.0);
        let idx = (t.floor() as usize).min(out.len() - 1);
        out[idx] = out[idx].max(ratio);
    }
    out
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FreqSplitPoint {
    pub n_block: usize,
    pub t: f64,
    pub low_norm: f64,
    pub high_norm: f64,
}

/// `H^s` norms of `Q_{<= n^2} z` and `Q_{> n^2} z` at the block boundaries
/// `t = n T_block`.
pub fn freq_split_series(
    traj: &Trajectory,
    s: f64,
    t_block: f64,
) -> Result<Vec<FreqSplitPoint>, CoreError> {
    if !(t_block > 0.0) {
        return Err(CoreError::BadTrajectory("positive block length".into()));
    }
    let t_end = *traj.times.last().unwrap();
    let h = traj.stored_dt();
    let mut out = Vec::new();
    let mut n_block = 0usize;
    loop {
        let t = n_block as f64 * t_block;
        if t > t_end + 1e-12 {
            break;
        }
        let j = if h > 0.0 { ((t / h).round() as usize).min(traj.len() - 1) } else { 0 };
        if (traj.times[j] - t).abs() > h * 0.5 + 1e-12 {
            return Err(CoreError::BadTrajectory("block boundaries must hit stored times".into()));
        }
        let cut = (n_block * n_block) as u32;
        let sp = &traj.spectra[j];
        out.push(FreqSplitPoint {
            n_block,
            t: traj.times[j],
            low_norm: sobolev_norm(&band_select(sp, BandSelector::Low(cut)), s),
            high_norm: sobolev_norm(&band_select(sp, BandSelector::High(cut)), s),
        });
        n_block += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Inequality falsification harness
// ---------------------------------------------------------------------------

/// Named estimates whose discrete shadows the harness samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimateId {
    /// `||u||_{L^4_{t,x}} <~ ||u||_{X^{0, 3/8+delta}}`.
    StrichartzL4,
    /// `||u||_{L^6_{t,x}} <~ ||u||_{X^{delta, 1/2+delta}}`.
    StrichartzL6,
    /// `||u||_{L^p_t L^q_x} <~ ||u||_{X^{s,b}}`, `b >= 1/2 - 1/p`, `s >= 1/2 - 1/q`.
    BourgainSobolev { p: f64, q: f64 },
    /// `||NF(z)||_{H^{s+a}} <~ ||z||^2_{H^{1/2+delta}} ||z||_{H^s}`.
    NfSmoothing,
    /// `||eta_T e^{it dxx} z0||_{Z^s} <~ ||z0||_{H^s}`.
    WindowedLinear,
    /// `||z||_{C(R; H^s)} <~ ||z||_{Z^s}`.
    ContinuityEmbedding,
    /// `||z||_{Y^{s,b1}} <~ ||z||_{X^{s,b2}}` for `b2 > b1 + 1/2`.
    YFromX,
    /// `||fg||_{H^s} <~ ||f||_{H^{s1}} ||g||_{H^{s2}}`.
    SobolevProduct,
    /// `||u||_{H^s} <= C (1 + ||z||^2_{H^{1/4}}) ||z||_{H^s}` across the gauge chain.
    UZComparison,
    /// `||T(z)||_{X^{s+a,-1/2+delta}} <~` product of `Z`-norms, for one of the
    /// quintic/septic interaction terms along a gauge trajectory.
    TermXNorm(TermKind),
}

impl std::fmt::Display for EstimateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimateId::StrichartzL4 => write!(f, "strichartz_l4"),
            EstimateId::StrichartzL6 => write!(f, "strichartz_l6"),
            EstimateId::BourgainSobolev { p, q } => write!(f, "bourgain_sobolev_{p}_{q}"),
            EstimateId::NfSmoothing => write!(f, "nf_smoothing"),
            EstimateId::WindowedLinear => write!(f, "windowed_linear"),
            EstimateId::ContinuityEmbedding => write!(f, "continuity_embedding"),
            EstimateId::YFromX => write!(f, "y_from_x"),
            EstimateId::SobolevProduct => write!(f, "sobolev_product"),
            EstimateId::UZComparison => write!(f, "u_z_comparison"),
            EstimateId::TermXNorm(k) => write!(f, "term_x_{}", k.name()),
        }
    }
}

impl FromStr for EstimateId {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, CoreError> {
        let id = match s {
            "strichartz_l4" => EstimateId::StrichartzL4,
            "strichartz_l6" => EstimateId::StrichartzL6,
            "bourgain_sobolev_4_4" => EstimateId::BourgainSobolev { p: 4.0, q: 4.0 },
            "bourgain_sobolev_6_6" => EstimateId::BourgainSobolev { p: 6.0, q: 6.0 },
            "nf_smoothing" => EstimateId::NfSmoothing,
            "windowed_linear" => EstimateId::WindowedLinear,
            "continuity_embedding" => EstimateId::ContinuityEmbedding,
            "y_from_x" => EstimateId::YFromX,
            "sobolev_product" => EstimateId::SobolevProduct,
            "u_z_comparison" => EstimateId::UZComparison,
            other => {
                if let Some(name) = other.strip_prefix("term_x_") {
                    let kind = TermKind::ALL
                        .iter()
                        .find(|k| k.name() == name)
                        .ok_or_else(|| CoreError::UnknownEstimate(other.into()))?;
                    EstimateId::TermXNorm(*kind)
                } else {
                    return Err(CoreError::UnknownEstimate(other.into()));
                }
            }
        };
        Ok(id)
    }
}

/// Trial configuration. `sizes = None` selects per-estimate defaults.
#[derive(Debug, Clone, Serialize)]
pub struct TrialConfig {
    pub trials: usize,
    pub seed: u64,
    pub sizes: Option<Vec<usize>>,
    pub t_window: f64,
    pub delta: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig { trials: 200, seed: 1, sizes: None, t_window: 1.0, delta: 0.01 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeStats {
    pub n: usize,
    pub trials: usize,
    pub max_ratio: f64,
    pub median_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub id: String,
    pub per_size: Vec<SizeStats>,
    /// Max ratio grew monotonically by > 2x per doubling across >= 3 doublings.
    pub falsified: bool,
}

fn spacetime_nt(nx: usize, t_window: f64) -> usize {
    // the tau grid must reach the parabola: tau_max = pi Nt/(4T) >= (nx/2)^2
    let need = 1.3 * 4.0 * t_window * (nx as f64 / 2.0).powi(2) / std::f64::consts::PI;
    ((need.ceil() as usize).next_power_of_two()).max(256)
}

/// Random time-windowed field with power-law envelopes in `xi` and in the
/// distance `tau + xi^2` to the free paraboloid.
fn random_windowed_field(
    rng: &mut ChaCha8Rng,
    nx: usize,
    nt: usize,
    t_window: f64,
) -> SpacetimeField {
    let r1: f64 = rng.gen_range(0.55..1.6);
    let r2: f64 = rng.gen_range(0.6..1.4);
    let mut field = SpacetimeField::zeros(nx, nt, t_window);
    let window = WindowFn::new(t_window);
    let half = nx as i64 / 2;
    for xi in -half..half {
        // dual-grid coefficients, FFT bin order
        let mut buf = vec![Complex64::ZERO; nt];
        for (bin, slot) in buf.iter_mut().enumerate() {
            let m = if bin < nt / 2 { bin as i64 } else { bin as i64 - nt as i64 };
            let tau = TWO_PI * m as f64 / (4.0 * t_window);
            let amp = bracket(xi).powf(-r1) * (1.0 + (tau + (xi * xi) as f64).powi(2)).powf(-r2 / 2.0);
            let phase: f64 = rng.gen_range(0.0..TWO_PI);
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            *slot = Complex64::from_polar(amp, phase) * sign;
        }
        crate::spectral::fft_in_place(&mut buf, true);
        for (k, v) in buf.iter().enumerate() {
            let t = field.time(k);
            field.set(xi, k, v * window.apply(t));
        }
    }
    field
}

fn random_decay_spectrum(rng: &mut ChaCha8Rng, n: usize) -> Spectrum {
    let r: f64 = rng.gen_range(0.55..1.6);
    let mut out = Spectrum::zeros(n);
    for xi in -(n as i64) / 2..n as i64 / 2 {
        let amp = bracket(xi).powf(-r);
        let phase: f64 = rng.gen_range(0.0..TWO_PI);
        out.set(xi, Complex64::from_polar(amp, phase));
    }
    out
}

fn ratio_or_zero(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

fn default_sizes(id: &EstimateId) -> Vec<usize> {
    match id {
        EstimateId::NfSmoothing
        | EstimateId::SobolevProduct
        | EstimateId::UZComparison => vec![16, 32, 64, 128],
        EstimateId::TermXNorm(k) => match k {
            TermKind::N12 | TermKind::N22 => vec![8],
            _ => vec![8, 16],
        },
        _ => vec![8, 16, 32, 64],
    }
}

fn one_ratio(id: &EstimateId, n: usize, cfg: &TrialConfig, trial: usize) -> f64 {
    let mut rng = trial_rng(cfg.seed, trial);
    let d = cfg.delta;
    match id {
        EstimateId::StrichartzL4 => {
            let nt = spacetime_nt(n, cfg.t_window);
            let f = random_windowed_field(&mut rng, n, nt, cfg.t_window);
            let lhs = mixed_lp_norm(&f, 4.0, 4.0).expect("p=q=4");
            let rhs = spacetime_norm(&f, SpacetimeNormKind::X { s: 0.0, b: 0.375 + d });
            ratio_or_zero(lhs, rhs)
        }
        EstimateId::StrichartzL6 => {
            let nt = spacetime_nt(n, cfg.t_window);
            let f = random_windowed_field(&mut rng, n, nt, cfg.t_window);
            let lhs = mixed_lp_norm(&f, 6.0, 6.0).expect("p=q=6");
            let rhs = spacetime_norm(&f, SpacetimeNormKind::X { s: d, b: 0.5 + d });
            ratio_or_zero(lhs, rhs)
        }
        EstimateId::BourgainSobolev { p, q } => {
            let nt = spacetime_nt(n, cfg.t_window);
            let f = random_windowed_field(&mut rng, n, nt, cfg.t_window);
            let lhs = mixed_lp_norm(&f, *p, *q).expect("valid exponents");
            let s = 0.5 - 1.0 / q + d;
            let b = 0.5 - 1.0 / p + d;
            let rhs = spacetime_norm(&f, SpacetimeNormKind::X { s, b });
            ratio_or_zero(lhs, rhs)
        }
        EstimateId::NfSmoothing => {
            let z = random_decay_spectrum(&mut rng, n);
            let rule = ComparisonRule::default();
            let (s, a) = (1.0, 0.5);
            let lhs = sobolev_norm(&eval_term(TermKind::Nf, &z, 0.0, &rule), s + a);
            let rhs = sobolev_norm(&z, 0.5 + d).powi(2) * sobolev_norm(&z, s);
            ratio_or_zero(lhs, rhs)
        }
        EstimateId::WindowedLinear => {
            let z0 = random_decay_spectrum(&mut rng, n);
            let nt = spacetime_nt(n, cfg.t_window);
            let f = window_free_solution(&z0, cfg.t_window, nt);
            let s = 0.5;
            let lhs = spacetime_norm(&f, SpacetimeNormKind::Z { s });
            ratio_or_zero(lhs, sobolev_norm(&z0, s))
        }
        EstimateId::ContinuityEmbedding => {
            let nt = spacetime_nt(n, cfg.t_window);
            let f = random_windowed_field(&mut rng, n, nt, cfg.t_window);
            let s = 0.5;
            let lhs = (0..f.nt())
                .map(|k| sobolev_norm(&f.column(k), s))
                .fold(0.0, f64::max);
            let rhs = spacetime_norm(&f, SpacetimeNormKind::Z { s });
            ratio_or_zero(lhs, rhs)
        }
        EstimateId::YFromX => {
            let nt = spacetime_nt(n, cfg.t_window);
            let f = random_windowed_field(&mut rng, n, nt, cfg.t_window);
            let s = 0.5;
            let lhs = spacetime_norm(&f, SpacetimeNormKind::Y { s, b: 0.0 });
            let rhs = spacetime_norm(&f, SpacetimeNormKind::X { s, b: 0.5 + d });
            ratio_or_zero(lhs, rhs)
        }
        EstimateId::SobolevProduct => {
            let f = random_decay_spectrum(&mut rng, n);
            let g = random_decay_spectrum(&mut rng, n);
            let prod = multiply_dealiased(&[(&f, false), (&g, false)]).expect("arity 2");
            let (s, s1, s2) = (0.0, 0.5 + d, 0.5 + d);
            let lhs = sobolev_norm(&prod, s);
            let rhs = sobolev_norm(&f, s1) * sobolev_norm(&g, s2);
            ratio_or_zero(lhs, rhs)
        }
        EstimateId::UZComparison => {
            let zspec = random_decay_spectrum(&mut rng, n);
            let z = synthesize(&zspec);
            let mu = crate::gauge::compute_mu(&z);
            let state = GaugeState { mu, g_accum: 0.0, t: 0.0, l4_integral: 0.0, last_l4: 0.0 };
            let u = analyze(&gauge_chain(&z, &state, ChainDirection::ZToU));
            let z_quarter = sobolev_norm(&zspec, 0.25);
            [0.0, 0.5, 1.0, 2.0]
                .iter()
                .map(|&s| {
                    ratio_or_zero(
                        sobolev_norm(&u, s),
                        (1.0 + z_quarter * z_quarter) * sobolev_norm(&zspec, s),
                    )
                })
                .fold(0.0, f64::max)
        }
        EstimateId::TermXNorm(kind) => term_x_ratio(*kind, n, cfg, &mut rng),
    }
}

/// Ratio for the interaction-term estimates: X-norm of the windowed term
/// trajectory against the per-term product of Z-norms of the solution.
fn term_x_ratio(kind: TermKind, n: usize, cfg: &TrialConfig, rng: &mut ChaCha8Rng) -> f64 {
    let t_window = cfg.t_window;
    let nt = 128usize;
    let rule = ComparisonRule::default();
    let raw = random_decay_spectrum(rng, n);
    let z0 = raw.scale(Complex64::new(0.3 / raw.l2_norm(), 0.0));
    let mu = z0.l2_norm_sq() / TWO_PI;
    let grid_dt = 4.0 * t_window / nt as f64;
    let cfg_e = StepperConfig {
        store_every: 4,
        ..StepperConfig::new(grid_dt / 4.0, 2.0 * t_window, EquationKind::Gauge)
    };
    let traj = evolve(&z0, &cfg_e, mu).expect("small-data gauge run");
    let zfield = window_extend(&traj, t_window, nt).expect("aligned window");

    // term field: evaluate on the unwindowed extension, then window
    let window = WindowFn::new(t_window);
    let mut tfield = SpacetimeField::zeros(n, nt, t_window);
    let h = traj.stored_dt();
    let t_end = *traj.times.last().unwrap();
    for k in 0..nt {
        let t = tfield.time(k);
        let w = window.apply(t);
        if w == 0.0 {
            continue;
        }
        let col = if t < 0.0 {
            linear_propagate(&traj.spectra[0], t)
        } else if t <= t_end + 1e-12 {
            traj.spectra[(t / h).round() as usize].clone()
        } else {
            linear_propagate(traj.spectra.last().unwrap(), t - t_end)
        };
        let term = eval_term(kind, &col, mu, &rule);
        tfield.set_column(k, &term.scale(Complex64::new(w, 0.0)));
    }

    let d = cfg.delta;
    let (s, a) = (1.0, 0.2);
    let sigma = 1.0f64.min(s);
    let lhs = spacetime_norm(&tfield, SpacetimeNormKind::X { s: s + a, b: -0.5 + d });
    let z_s = spacetime_norm(&zfield, SpacetimeNormKind::Z { s });
    let z_sigma = spacetime_norm(&zfield, SpacetimeNormKind::Z { s: sigma });
    let rhs = match kind {
        TermKind::B1 | TermKind::B2 | TermKind::B3 | TermKind::NrCubic | TermKind::Nf => {
            z_sigma * z_sigma * z_s
        }
        TermKind::N12 | TermKind::N22 => {
            let y = spacetime_norm(&zfield, SpacetimeNormKind::Y { s: 0.5 + d, b: 0.0 });
            let x = spacetime_norm(&zfield, SpacetimeNormKind::X { s, b: 0.5 });
            y.powi(6) * x
        }
        _ => z_sigma.powi(4) * z_s,
    };
    ratio_or_zero(lhs, rhs)
}

/// Run the falsification trial for one estimate.
pub fn inequality_trial(id: EstimateId, cfg: &TrialConfig) -> Result<TrialReport, CoreError> {
    if cfg.trials < 30 {
        return Err(CoreError::TooFewTrials(cfg.trials));
    }
    let sizes = cfg.sizes.clone().unwrap_or_else(|| default_sizes(&id));
    let mut per_size = Vec::new();
    for &n in &sizes {
        let mut ratios: Vec<f64> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| one_ratio(&id, n, cfg, trial))
            .collect();
        ratios.sort_by(f64::total_cmp);
        let max_ratio = *ratios.last().unwrap();
        let median_ratio = ratios[ratios.len() / 2];
        per_size.push(SizeStats { n, trials: cfg.trials, max_ratio, median_ratio });
    }
    let doublings = per_size.len().saturating_sub(1);
    let falsified = doublings >= 3
        && per_size.windows(2).all(|w| w[1].max_ratio > 2.0 * w[0].max_ratio);
    Ok(TrialReport { id: id.to_string(), per_size, falsified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_smooth;
    use crate::SQRT_2PI;

    #[test]
    fn smoothing_params_validated() {
        assert!(SmoothingParams::new(0.75, 0.2, 0.01).is_ok());
        assert!(SmoothingParams::new(0.75, 0.3, 0.01).is_err());
        assert!(SmoothingParams::new(2.0, 0.6, 0.01).is_err()); // a > 1/2 - eps
    }

    #[test]
    fn smoothing_series_zero_data_and_t0() {
        let z0 = Spectrum::zeros(16);
        let cfg = StepperConfig::new(0.01, 0.05, EquationKind::Gauge);
        let traj = evolve(&z0, &cfg, 0.0).unwrap();
        let params = SmoothingParams::new(0.75, 0.2, 0.01).unwrap();
        let series = smoothing_series(&traj, &z0, &params).unwrap();
        assert!(series.iter().all(|p| p.residual_norm == 0.0));

        let z0 = random_smooth(3, 16, 1.0, 0.3);
        let traj = evolve(&z0, &cfg, z0.l2_norm_sq() / TWO_PI).unwrap();
        let series = smoothing_series(&traj, &z0, &params).unwrap();
        assert_eq!(series[0].residual_norm, 0.0, "residual at t=0 vanishes");
        assert!(series.last().unwrap().residual_norm > 0.0);
    }

    #[test]
    fn single_mode_smoothing_residual_is_phase_mismatch() {
        // single mode k: the gauge flow is a pure phase rotation
        // theta(t) = (-k^2 - k mu + Lam/(16pi^4)) t, so the residual is
        // |e^{i theta} - e^{-i k^2 t}| <k>^{s+a} |zhat(k)|
        let k = 2i64;
        let amp = 0.4;
        let z0 = Spectrum::single_mode(32, k, Complex64::new(amp, 0.0));
        let mu = amp * amp;
        let cfg = StepperConfig::new(1e-3, 0.3, EquationKind::Gauge);
        let traj = evolve(&z0, &cfg, mu).unwrap();
        let params = SmoothingParams::new(0.75, 0.2, 0.01).unwrap();
        let series = smoothing_series(&traj, &z0, &params).unwrap();
        let lam = TWO_PI * amp.powi(4);
        let pi = std::f64::consts::PI;
        let theta_dot = -((k * k) as f64) - k as f64 * mu + lam / (16.0 * pi.powi(4));
        for p in series.iter() {
            let phase_gap = (Complex64::from_polar(1.0, theta_dot * p.t)
                - Complex64::from_polar(1.0, -((k * k) as f64) * p.t))
            .norm();
            let want = phase_gap * bracket(k).powf(0.95) * amp * SQRT_2PI;
            assert!(
                (p.residual_norm - want).abs() < 1e-6 * (1.0 + want),
                "t={}: {} vs {}",
                p.t,
                p.residual_norm,
                want
            );
        }
    }

    #[test]
    fn growth_series_plane_wave_constant() {
        let u0 = Spectrum::single_mode(32, 1, Complex64::new(1.0, 0.0));
        let cfg = StepperConfig {
            store_every: 50,
            ..StepperConfig::new(1e-2, 3.0, EquationKind::Dnls)
        };
        let traj = evolve(&u0, &cfg, 0.0).unwrap();
        let params = GrowthParams::new(2.0, 0.01, 1.0).unwrap();
        let series = growth_series(&traj, &params);
        let h0 = series[0].hs_norm;
        for (i, p) in series.iter().enumerate() {
            assert!((p.hs_norm - h0).abs() < 1e-8 * h0, "plane-wave H^s norm is constant");
            if i > 0 {
                let prev = &series[i - 1];
                assert!(
                    p.hs_norm / p.envelope <= prev.hs_norm / prev.envelope + 1e-12,
                    "ratio to envelope must be non-increasing"
                );
            }
        }
        // zero data: zero series
        let ztraj = evolve(&Spectrum::zeros(16), &cfg, 0.0).unwrap();
        assert!(growth_series(&ztraj, &params).iter().all(|p| p.hs_norm == 0.0));
        // s = 1: envelope exponent is eps
        let p1 = GrowthParams::new(1.0, 0.01, 1.0).unwrap();
        let g = growth_series(&traj, &p1);
        let last = g.last().unwrap();
        assert!((last.envelope / g[0].envelope - (1.0 + 9.0f64).powf(0.005)).abs() < 1e-12);
    }

    #[test]
    fn measured_exponent_flat_for_plane_wave() {
        let u0 = Spectrum::single_mode(32, 1, Complex64::new(0.8, 0.0));
        let cfg = StepperConfig {
            store_every: 100,
            ..StepperConfig::new(1e-2, 5.0, EquationKind::Dnls)
        };
        let traj = evolve(&u0, &cfg, 0.0).unwrap();
        let expo = measured_growth_exponent(&traj, 2.0);
        assert!(expo.abs() < 1e-8, "plane-wave orbit has flat H^s norm, got {expo}");
    }

    #[test]
    fn freq_split_examples() {
        let u0 = random_smooth(5, 32, 0.4, 0.4);
        let cfg = StepperConfig {
            store_every: 20,
            ..StepperConfig::new(5e-3, 2.0, EquationKind::Dnls)
        };
        let traj = evolve(&u0, &cfg, 0.0).unwrap();
        let series = freq_split_series(&traj, 1.0, 1.0).unwrap();
        assert_eq!(series.len(), 3); // n = 0, 1, 2
        for p in &series {
            let j = (p.t / traj.stored_dt()).round() as usize;
            let total = sobolev_norm(&traj.spectra[j], 1.0);
            let sum = (p.low_norm * p.low_norm + p.high_norm * p.high_norm).sqrt();
            assert!((sum - total).abs() < 1e-12 * (1.0 + total), "orthogonal split");
            // low part obeys the multiplier bound <n^2>^{s-1} ||z||_{H^1} for s = 1
            let cut = (p.n_block * p.n_block) as f64;
            let bound = (1.0 + cut * cut).powf(0.0) * total;
            assert!(p.low_norm <= bound + 1e-12);
        }
        // band-limited data below the first cut: high part vanishes for n >= 1
        let mut lowdata = Spectrum::zeros(32);
        lowdata.set(0, Complex64::new(0.2, 0.0));
        let traj = evolve(&lowdata, &cfg, 0.0).unwrap();
        let series = freq_split_series(&traj, 0.5, 1.0).unwrap();
        for p in series.iter().skip(1) {
            assert_eq!(p.high_norm, 0.0);
        }
    }

    #[test]
    fn low_part_multiplier_bound_exact() {
        // ||Q_{<= n^2} z||_{H^s} <= <n^2>^{s-1} ||z||_{H^1} for s >= 1 pointwise
        let z = random_smooth(7, 64, 0.1, 1.0);
        let s = 1.75;
        for n_block in 1usize..5 {
            let cut = (n_block * n_block) as u32;
            let low = band_select(&z, BandSelector::Low(cut));
            let lhs = sobolev_norm(&low, s);
            let bound = bracket(cut as i64).powf(s - 1.0) * sobolev_norm(&z, 1.0);
            assert!(lhs <= bound * (1.0 + 1e-12), "n={n_block}: {lhs} vs {bound}");
        }
    }

    #[test]
    fn estimate_id_parsing() {
        assert!(EstimateId::from_str("strichartz_l4").is_ok());
        assert!(EstimateId::from_str("term_x_n21").is_ok());
        assert!(matches!(
            EstimateId::from_str("no_such_estimate"),
            Err(CoreError::UnknownEstimate(_))
        ));
    }

    #[test]
    fn trial_rejects_small_count() {
        let cfg = TrialConfig { trials: 10, ..TrialConfig::default() };
        assert!(matches!(
            inequality_trial(EstimateId::SobolevProduct, &cfg),
            Err(CoreError::TooFewTrials(10))
        ));
    }

    #[test]
    fn sobolev_product_trial_reference_value() {
        // f = g = e^{ix}: ratio = ||e^{2ix}||_{L^2} / ||e^{ix}||^2_{H^{0.51}}
        //                       = sqrt(2pi) / (2pi * 2^{0.51})
        let f = Spectrum::single_mode(16, 1, Complex64::new(1.0, 0.0));
        let prod = multiply_dealiased(&[(&f, false), (&f, false)]).unwrap();
        let lhs = sobolev_norm(&prod, 0.0);
        let rhs = sobolev_norm(&f, 0.51).powi(2);
        let want = SQRT_2PI / (TWO_PI * 2f64.powf(0.51));
        assert!((lhs / rhs - want).abs() < 1e-12);
    }

    #[test]
    fn term_x_trial_runs() {
        // one quintic-term trial; verdicts need three doublings, so a single
        // size can never falsify. N=16 is the smallest grid on which the
        // nf-derived sets are nonempty with the default lambda = 4 (at N=8
        // the in-band |b| >= 4 constraint empties them).
        let cfg = TrialConfig { trials: 30, sizes: Some(vec![16]), ..TrialConfig::default() };
        let rep = inequality_trial(EstimateId::TermXNorm(TermKind::N21), &cfg).unwrap();
        assert!(!rep.falsified);
        assert!(rep.per_size[0].max_ratio.is_finite() && rep.per_size[0].max_ratio > 0.0);
    }

    #[test]
    fn quick_trials_do_not_falsify() {
        // a cut-down pass over the cheap estimates; full 200-trial runs live
        // in the acceptance suite
        let cfg = TrialConfig {
            trials: 30,
            sizes: Some(vec![16, 32]),
            ..TrialConfig::default()
        };
        for id in [EstimateId::SobolevProduct, EstimateId::NfSmoothing, EstimateId::UZComparison] {
            let report = inequality_trial(id, &cfg).unwrap();
            assert!(!report.falsified, "{} unexpectedly falsified", report.id);
            assert!(report.per_size.iter().all(|s| s.max_ratio.is_finite()));
        }
    }
}
