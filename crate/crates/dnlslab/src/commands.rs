//! The five experiment drivers: simulate, smoothing, growth, verify, falsify.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use dnls_core::diagnostics::{
    freq_split_series, growth_series, inequality_trial, measured_growth_exponent,
    smoothing_series, smoothing_signature, unit_interval_maxima, EstimateId, GrowthParams,
    SmoothingParams, TrialConfig, TrialReport,
};
use dnls_core::evolve::{evolve, EquationKind, StepperConfig, Trajectory};
use dnls_core::gauge::{gauge_chain, ChainDirection, GaugeState};
use dnls_core::spectral::{
    analyze, derivative, l4_fourth_power, multiply_dealiased, random_smooth, synthesize, Spectrum,
};
use dnls_core::terms::{
    duhamel_residual, eval_term, gauge_rhs, n21_star3, quintic_overlap_pair,
    quintic_overlap_triple, star3_l4_term, ComparisonRule, RhsMode, TermKind,
};
use dnls_core::TWO_PI;

use crate::config::{Config, ConfigError};
use crate::rundir::{convention_notes, RunDir};

/// Exit status carried out of a command.
pub enum Outcome {
    Success(PathBuf),
    /// A check failed or the integrator aborted; exit code 2.
    Numerical(String),
}

fn stepper_from(cfg: &Config) -> Result<(StepperConfig, ComparisonRule), ConfigError> {
    let rule = ComparisonRule::new(cfg.f64_or("rule.lambda", 4.0)?)
        .map_err(|e| ConfigError(format!("key 'rule.lambda': {e}")))?;
    let equation = match cfg.str_or("stepper.equation", "dnls")?.as_str() {
        "dnls" => EquationKind::Dnls,
        "gauge" => EquationKind::Gauge,
        other => return Err(ConfigError(format!("key 'stepper.equation' unknown value '{other}'"))),
    };
    let rhs_mode = match cfg.str_or("stepper.rhs_mode", "fast")?.as_str() {
        "fast" => RhsMode::Fast,
        "oracle" => RhsMode::Oracle,
        other => return Err(ConfigError(format!("key 'stepper.rhs_mode' unknown value '{other}'"))),
    };
    let stepper = StepperConfig {
        dt: cfg.f64_or("stepper.dt", 1e-3)?,
        t_final: cfg.f64_or("stepper.t_final", 1.0)?,
        store_every: cfg.usize_or("stepper.store_every", 10)?,
        equation,
        rule,
        rhs_mode,
        mass_drift_guard: cfg.f64_opt("stepper.mass_drift_guard")?,
    };
    Ok((stepper, rule))
}

fn monitors_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,mass,momentum,energy\n");
    for (t, m) in traj.times.iter().zip(&traj.monitors) {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", t, m.mass, m.momentum, m.energy);
    }
    s
}

fn gauge_csv(traj: &Trajectory) -> Option<String> {
    let states = traj.gauge_states.as_ref()?;
    let mut s = String::from("t,mu,g_accum,l4_integral\n");
    for st in states {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", st.t, st.mu, st.g_accum, st.l4_integral);
    }
    Some(s)
}

/// `simulate`: integrate one flow and persist the trajectory.
pub fn simulate(cfg: &Config, out_root: &Path, name: &str) -> anyhow::Result<Outcome> {
    let n = cfg.grid_n()?;
    let (stepper, rule) = stepper_from(cfg)?;
    let init = cfg.initial_spectrum(n)?;
    let mu = init.l2_norm_sq() / TWO_PI;
    let traj = if stepper.t_final == 0.0 {
        // degenerate run: persist the initial state only
        Trajectory {
            times: vec![0.0],
            monitors: vec![dnls_core::conserved::ConservedTriple::of(&synthesize(&init))],
            gauge_states: (stepper.equation == EquationKind::Gauge)
                .then(|| vec![GaugeState::initial(mu, &init)]),
            spectra: vec![init.clone()],
            dt_used: 0.0,
        }
    } else {
        match evolve(&init, &stepper, mu) {
            Ok(t) => t,
            Err(e) => return Ok(Outcome::Numerical(e.to_string())),
        }
    };

    let mut dir = RunDir::stage(out_root, name)?;
    dir.write_json("config.json", cfg.echo())?;
    dir.write("monitors.csv", &monitors_csv(&traj))?;
    if let Some(g) = gauge_csv(&traj) {
        dir.write("gauge.csv", &g)?;
    }
    for (k, (t, spec)) in traj.times.iter().zip(&traj.spectra).enumerate() {
        let rel = format!("snapshots/snap_{k:06}.csv");
        dir.write(&rel, &spec.to_csv(Some(&format!("t={t:.16e}"))))?;
    }
    let path = dir.finalize("simulate", cfg.echo(), convention_notes(rule.lambda()))?;
    Ok(Outcome::Success(path))
}

#[derive(Serialize)]
struct SmoothingReport {
    params: SmoothingParams,
    sizes: Vec<usize>,
    data_norms: Vec<f64>,
    residual_norms: Vec<f64>,
    data_slope: f64,
    residual_slope: f64,
    separation: f64,
    threshold: f64,
    pass: bool,
}

/// `smoothing`: the grid-doubling smoothing-signature experiment.
pub fn smoothing(cfg: &Config, out_root: &Path, name: &str) -> anyhow::Result<Outcome> {
    let s = cfg.f64_or("smoothing.s", 0.75)?;
    let a = cfg.f64_or("smoothing.a", 0.2)?;
    let margin = cfg.f64_or("smoothing.margin", 0.01)?;
    let t_final = cfg.f64_or("smoothing.t_final", 0.5)?;
    let dt = cfg.f64_or("smoothing.dt", 1e-3)?;
    let mass = cfg.f64_or("smoothing.mass", 0.25)?;
    let sizes = cfg.usize_list_or("smoothing.sizes", &[32, 64, 128])?;
    let seed = cfg.u64_or("data.seed", 42)?;
    let params = SmoothingParams::new(s, a, margin)
        .map_err(|e| ConfigError(format!("smoothing.*: {e}")))?;

    let sig = smoothing_signature(s, a, margin, t_final, dt, &sizes, seed, mass)?;

    // full residual series at the largest size for plotting
    let n_big = *sizes.last().expect("at least one size");
    let raw = dnls_core::spectral::random_hs(seed, s, n_big, margin);
    let z0 = raw.scale(Complex64::new(mass / raw.l2_norm(), 0.0));
    let cfg_e = StepperConfig {
        store_every: 50,
        ..StepperConfig::new(dt, t_final, EquationKind::Gauge)
    };
    let traj = evolve(&z0, &cfg_e, z0.l2_norm_sq() / TWO_PI)?;
    let series = smoothing_series(&traj, &z0, &params)?;
    let mut csv = String::from("t,residual_norm,data_norm\n");
    for p in &series {
        let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e}", p.t, p.residual_norm, p.data_norm);
    }

    let threshold = a / 2.0;
    let report = SmoothingReport {
        params,
        sizes: sig.sizes.clone(),
        data_norms: sig.data_norms.clone(),
        residual_norms: sig.residual_norms.clone(),
        data_slope: sig.data_slope,
        residual_slope: sig.residual_slope,
        separation: sig.separation,
        threshold,
        pass: sig.separation >= threshold,
    };
    let mut dir = RunDir::stage(out_root, name)?;
    dir.write_json("config.json", cfg.echo())?;
    dir.write_json("report.json", &report)?;
    dir.write(&format!("series_n{n_big}.csv"), &csv)?;
    let path = dir.finalize("smoothing", cfg.echo(), convention_notes(4.0))?;
    if report.pass {
        Ok(Outcome::Success(path))
    } else {
        Ok(Outcome::Numerical(format!(
            "slope separation {:.3} below threshold {threshold}",
            report.separation
        )))
    }
}

#[derive(Serialize)]
struct GrowthReport {
    params: GrowthParams,
    interval_maxima: Vec<f64>,
    interval_doublings: usize,
    bounded: bool,
    /// Fitted exponent of ||u(t)||_{H^s} against <t> for t >= 1.
    measured_exponent: f64,
    reference_exponent: f64,
}

/// `growth`: long dNLS run with envelope tracking and the frequency split.
pub fn growth(cfg: &Config, out_root: &Path, name: &str) -> anyhow::Result<Outcome> {
    let n = cfg.grid_n()?;
    let (mut stepper, rule) = stepper_from(cfg)?;
    stepper.equation = EquationKind::Dnls;
    if cfg.f64_opt("stepper.t_final")?.is_none() {
        stepper.t_final = 20.0;
    }
    let s = cfg.f64_or("growth.s", 2.0)?;
    let eps = cfg.f64_or("growth.epsilon", 0.01)?;
    let t_block = cfg.f64_or("growth.t_block", 1.0)?;
    let params = GrowthParams::new(s, eps, t_block)
        .map_err(|e| ConfigError(format!("growth.*: {e}")))?;
    let init = cfg.initial_spectrum(n)?;
    let traj = match evolve(&init, &stepper, 0.0) {
        Ok(t) => t,
        Err(e) => return Ok(Outcome::Numerical(e.to_string())),
    };

    let series = growth_series(&traj, &params);
    let mut growth_csv = String::from("t,hs_norm,envelope\n");
    for p in &series {
        let _ = writeln!(growth_csv, "{:.16e},{:.16e},{:.16e}", p.t, p.hs_norm, p.envelope);
    }
    let split = freq_split_series(&traj, s, t_block)?;
    let mut split_csv = String::from("n,t,low_norm,high_norm\n");
    for p in &split {
        let _ =
            writeln!(split_csv, "{},{:.16e},{:.16e},{:.16e}", p.n_block, p.t, p.low_norm, p.high_norm);
    }
    let maxima = unit_interval_maxima(&traj, s, eps);
    let doublings = maxima.windows(2).filter(|w| w[1] > 2.0 * w[0]).count();
    let report = GrowthReport {
        params,
        interval_maxima: maxima,
        interval_doublings: doublings,
        bounded: doublings == 0,
        measured_exponent: measured_growth_exponent(&traj, s),
        reference_exponent: 2.0 * (s - 1.0) + eps,
    };

    let mut dir = RunDir::stage(out_root, name)?;
    dir.write_json("config.json", cfg.echo())?;
    dir.write("monitors.csv", &monitors_csv(&traj))?;
    dir.write("growth.csv", &growth_csv)?;
    dir.write("freqsplit.csv", &split_csv)?;
    dir.write_json("report.json", &report)?;
    let path = dir.finalize("growth", cfg.echo(), convention_notes(rule.lambda()))?;
    Ok(Outcome::Success(path))
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    checks: Vec<Check>,
    all_pass: bool,
}

fn max_diff(a: &Spectrum, b: &Spectrum) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `verify`: the oracle/identity battery on the configured data.
pub fn verify(cfg: &Config, out_root: &Path, name: &str) -> anyhow::Result<Outcome> {
    let n = cfg.grid_n()?.min(32);
    let rule = ComparisonRule::new(cfg.f64_or("rule.lambda", 4.0)?)
        .map_err(|e| ConfigError(format!("key 'rule.lambda': {e}")))?;
    let count = cfg.usize_or("verify.spectra", 10)?;
    let seed0 = cfg.u64_or("data.seed", 1)?;
    let configured = cfg.initial_spectrum(n)?;

    let mut checks: Vec<Check> = Vec::new();
    let push = |name: String, value: f64, threshold: f64, checks: &mut Vec<Check>| {
        checks.push(Check { name, value, threshold, pass: value <= threshold });
    };

    // identity battery over the configured spectrum plus seeded random ones
    let mut worst_round = 0.0f64;
    let mut worst_cancel = 0.0f64;
    let mut worst_quintic = 0.0f64;
    let mut worst_star = 0.0f64;
    let mut worst_fast = 0.0f64;
    for idx in 0..=count {
        let z = if idx == 0 {
            configured.clone()
        } else {
            random_smooth(seed0 + idx as u64, n, 0.35, 0.9)
        };
        let scale = 1.0 + z.l2_norm_sq();
        let mu = z.l2_norm_sq() / TWO_PI;

        let round = max_diff(&analyze(&synthesize(&z)), &z);
        worst_round = worst_round.max(round);

        let zx = derivative(&z, 1);
        let full_d = multiply_dealiased(&[(&z, false), (&z, false), (&zx, true)])?
            .scale(Complex64::new(-1.0, 0.0));
        let p2: f64 = z.iter().map(|(xi, c)| xi as f64 * c.norm_sqr()).sum();
        let mut resonant = Spectrum::zeros(n);
        for (xi, c) in z.iter() {
            resonant.set(
                xi,
                Complex64::new(0.0, p2 / std::f64::consts::PI) * c
                    - Complex64::new(0.0, xi as f64 / TWO_PI) * c.norm_sqr() * c,
            );
        }
        let recon = eval_term(TermKind::NrDeriv, &z, 0.0, &rule)
            .axpy(Complex64::new(1.0, 0.0), &resonant);
        worst_cancel = worst_cancel.max(max_diff(&full_d, &recon) / scale);

        let full_q =
            multiply_dealiased(&[(&z, false), (&z, true), (&z, false), (&z, true), (&z, false)])?
                .scale(Complex64::new(0.0, 0.5));
        let lam = l4_fourth_power(&z);
        let recon_q = eval_term(TermKind::AQuintic, &z, 0.0, &rule)
            .axpy(
                Complex64::new(1.0, 0.0),
                &z.scale(Complex64::new(0.0, 3.0 * lam / (4.0 * std::f64::consts::PI))),
            )
            .axpy(Complex64::new(-3.0, 0.0), &quintic_overlap_pair(&z))
            .axpy(Complex64::new(1.0, 0.0), &quintic_overlap_triple(&z));
        worst_quintic = worst_quintic.max(max_diff(&full_q, &recon_q) / scale);

        let s3 = n21_star3(&z, &rule);
        let recon_s3 = star3_l4_term(&z)
            .axpy(Complex64::new(1.0, 0.0), &eval_term(TermKind::E1, &z, 0.0, &rule))
            .axpy(Complex64::new(1.0, 0.0), &eval_term(TermKind::E2, &z, 0.0, &rule));
        worst_star = worst_star.max(max_diff(&s3, &recon_s3) / scale);

        worst_fast = worst_fast.max(max_diff(
            &gauge_rhs(&z, mu, &rule, RhsMode::Fast),
            &gauge_rhs(&z, mu, &rule, RhsMode::Oracle),
        ));
    }
    push("analyze_synthesize_round_trip".into(), worst_round, 1e-12, &mut checks);
    push("cubic_cancellation_identity".into(), worst_cancel, 1e-11, &mut checks);
    push("quintic_reorganization_identity".into(), worst_quintic, 1e-11, &mut checks);
    push("n21_star3_decomposition".into(), worst_star, 1e-11, &mut checks);
    push("gauge_rhs_fast_vs_oracle".into(), worst_fast, 1e-11, &mut checks);

    // Duhamel residual on a short gauge run from the configured data
    let dt = cfg.f64_or("stepper.dt", 5e-4)?;
    let t_final = cfg.f64_or("stepper.t_final", 0.25)?;
    let z0 = configured;
    let mu = z0.l2_norm_sq() / TWO_PI;
    let run_cfg = StepperConfig::new(dt, t_final, EquationKind::Gauge);
    let residual = match evolve(&z0, &run_cfg, mu) {
        Ok(traj) => {
            let series = duhamel_residual(&traj, &z0, mu, &rule)?;
            series.residual_l2.iter().cloned().fold(0.0, f64::max)
        }
        Err(e) => return Ok(Outcome::Numerical(e.to_string())),
    };
    push("duhamel_residual".into(), residual, 1e-6, &mut checks);

    // gauge chain round trip on the configured data
    let field = synthesize(&z0);
    let state = GaugeState::initial(mu, &z0);
    let back = gauge_chain(
        &gauge_chain(&field, &state, ChainDirection::UToZ),
        &state,
        ChainDirection::ZToU,
    );
    let chain_defect = field
        .samples()
        .iter()
        .zip(back.samples())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    push("gauge_chain_round_trip".into(), chain_defect, 1e-12, &mut checks);

    let all_pass = checks.iter().all(|c| c.pass);
    let report = VerifyReport { checks, all_pass };
    let mut dir = RunDir::stage(out_root, name)?;
    dir.write_json("config.json", cfg.echo())?;
    dir.write_json("report.json", &report)?;
    // term spectra of the configured datum, for inspection
    for kind in [TermKind::NrDeriv, TermKind::AQuintic, TermKind::Nf, TermKind::B1] {
        let rel = format!("terms/{}.csv", kind.name());
        dir.write(&rel, &dnls_core::terms::term_csv(kind, &z0, mu, &rule))?;
    }
    let path = dir.finalize("verify", cfg.echo(), convention_notes(rule.lambda()))?;
    if report.all_pass {
        Ok(Outcome::Success(path))
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        Ok(Outcome::Numerical(format!("verification checks failed: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct FalsifyReport {
    reports: Vec<TrialReport>,
    any_falsified: bool,
}

fn default_estimates() -> Vec<String> {
    [
        "strichartz_l4",
        "strichartz_l6",
        "bourgain_sobolev_4_4",
        "bourgain_sobolev_6_6",
        "nf_smoothing",
        "windowed_linear",
        "continuity_embedding",
        "y_from_x",
        "sobolev_product",
        "u_z_comparison",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// `falsify`: inequality trials with verdicts.
pub fn falsify(cfg: &Config, out_root: &Path, name: &str) -> anyhow::Result<Outcome> {
    let names = cfg.str_list_opt("falsify.estimates")?.unwrap_or_else(default_estimates);
    let trial_cfg = TrialConfig {
        trials: cfg.usize_or("falsify.trials", 200)?,
        seed: cfg.u64_or("data.seed", 1)?,
        sizes: None,
        t_window: cfg.f64_or("falsify.t_window", 1.0)?,
        delta: cfg.f64_or("falsify.delta", 0.01)?,
    };
    let mut reports = Vec::new();
    let mut csv = String::from("estimate,n,trials,max_ratio,median_ratio\n");
    for nm in &names {
        let id: EstimateId =
            nm.parse().map_err(|e| ConfigError(format!("key 'falsify.estimates': {e}")))?;
        let rep = inequality_trial(id, &trial_cfg)?;
        for s in &rep.per_size {
            let _ = writeln!(
                csv,
                "{},{},{},{:.16e},{:.16e}",
                rep.id, s.n, s.trials, s.max_ratio, s.median_ratio
            );
        }
        reports.push(rep);
    }
    let any_falsified = reports.iter().any(|r| r.falsified);
    let report = FalsifyReport { reports, any_falsified };
    let mut dir = RunDir::stage(out_root, name)?;
    dir.write_json("config.json", cfg.echo())?;
    dir.write_json("report.json", &report)?;
    dir.write("ratios.csv", &csv)?;
    let path = dir.finalize("falsify", cfg.echo(), convention_notes(4.0))?;
    Ok(Outcome::Success(path))
}
