//! Flat dotted-key JSON configuration with flag overrides.
//!
//! The file is a single JSON object whose keys are dotted paths
//! (`"stepper.dt": 1e-3`); `--set key=value` entries override file values.
//! Unknown keys are rejected so sweep scripts fail loudly on typos.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde_json::Value;

use dnls_core::spectral::{random_hs, random_smooth, Spectrum};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

const KNOWN_KEYS: &[&str] = &[
    "run.name",
    "run.out_root",
    "grid.n",
    "stepper.dt",
    "stepper.t_final",
    "stepper.store_every",
    "stepper.equation",
    "stepper.rhs_mode",
    "stepper.mass_drift_guard",
    "rule.lambda",
    "data.kind",
    "data.seed",
    "data.s",
    "data.decay_margin",
    "data.decay",
    "data.l2",
    "data.amplitude",
    "data.k",
    "data.file",
    "smoothing.s",
    "smoothing.a",
    "smoothing.margin",
    "smoothing.sizes",
    "smoothing.t_final",
    "smoothing.dt",
    "smoothing.mass",
    "growth.s",
    "growth.epsilon",
    "growth.t_block",
    "falsify.estimates",
    "falsify.trials",
    "falsify.t_window",
    "falsify.delta",
    "verify.spectra",
];

/// Parsed configuration map.
#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, Value>,
}

impl Config {
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config, ConfigError> {
        let mut values: BTreeMap<String, Value> = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| ConfigError(format!("{} is not a JSON object: {e}", p.display())))?
            }
            None => BTreeMap::new(),
        };
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("--set '{item}' is not key=value")))?;
            let value = serde_json::from_str::<Value>(raw)
                .unwrap_or_else(|_| Value::String(raw.to_string()));
            values.insert(key.to_string(), value);
        }
        for key in values.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return err(format!("unknown key '{key}'"));
            }
        }
        Ok(Config { values })
    }

    /// The raw map, echoed into the manifest.
    pub fn echo(&self) -> &BTreeMap<String, Value> {
        &self.values
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| ConfigError(format!("key '{key}' must be a number"))),
        }
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| ConfigError(format!("key '{key}' must be a number"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| ConfigError(format!("key '{key}' must be a nonneg integer"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .ok_or_else(|| ConfigError(format!("key '{key}' must be a nonneg integer"))),
        }
    }

    pub fn i64_or(&self, key: &str, default: i64) -> Result<i64, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_i64()
                .ok_or_else(|| ConfigError(format!("key '{key}' must be an integer"))),
        }
    }

    pub fn str_or(&self, key: &str, default: &str) -> Result<String, ConfigError> {
        match self.values.get(key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => err(format!("key '{key}' must be a string")),
        }
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, ConfigError> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_u64()
                        .map(|u| u as usize)
                        .ok_or_else(|| ConfigError(format!("key '{key}' must list integers")))
                })
                .collect(),
            Some(_) => err(format!("key '{key}' must be an array")),
        }
    }

    pub fn str_list_opt(&self, key: &str) -> Result<Option<Vec<String>>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| ConfigError(format!("key '{key}' must list strings")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => err(format!("key '{key}' must be an array")),
        }
    }

    /// Grid size with the power-of-two constraint surfaced early.
    pub fn grid_n(&self) -> Result<usize, ConfigError> {
        let n = self.usize_or("grid.n", 64)?;
        if n < 8 || !n.is_power_of_two() {
            return err(format!("key 'grid.n' = {n} must be a power of two >= 8"));
        }
        Ok(n)
    }

    /// Build the initial spectrum described by the `data.*` keys.
    pub fn initial_spectrum(&self, n: usize) -> Result<Spectrum, ConfigError> {
        let kind = self.str_or("data.kind", "random_smooth")?;
        let seed = self.u64_or("data.seed", 1)?;
        match kind.as_str() {
            "zero" => Ok(Spectrum::zeros(n)),
            "plane_wave" => {
                let amp = self.f64_or("data.amplitude", 1.0)?;
                let k = self.i64_or("data.k", 1)?;
                if k < -(n as i64) / 2 || k >= n as i64 / 2 {
                    return err(format!("key 'data.k' = {k} outside the band of N = {n}"));
                }
                Ok(Spectrum::single_mode(n, k, Complex64::new(amp, 0.0)))
            }
            "random_smooth" => {
                let decay = self.f64_or("data.decay", 0.8)?;
                let l2 = self.f64_or("data.l2", 0.45)?;
                Ok(random_smooth(seed, n, decay, l2))
            }
            "random_hs" => {
                let s = self.f64_or("data.s", 0.75)?;
                let margin = self.f64_or("data.decay_margin", 0.01)?;
                let raw = random_hs(seed, s, n, margin);
                let l2 = self.f64_or("data.l2", 0.25)?;
                let norm = raw.l2_norm();
                Ok(if norm > 0.0 {
                    raw.scale(Complex64::new(l2 / norm, 0.0))
                } else {
                    raw
                })
            }
            "file" => {
                let path = self.str_or("data.file", "")?;
                if path.is_empty() {
                    return err("key 'data.file' required for data.kind = file");
                }
                read_spectrum_csv(Path::new(&path), n)
            }
            other => err(format!("key 'data.kind' has unknown value '{other}'")),
        }
    }
}

/// Parse a `xi,re,im` CSV into a band-`n` spectrum.
pub fn read_spectrum_csv(path: &Path, n: usize) -> Result<Spectrum, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut spec = Spectrum::zeros(n);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("xi,") {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |p: Option<&str>| -> Result<f64, ConfigError> {
            p.and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| ConfigError(format!("{}:{}: bad row", path.display(), lineno + 1)))
        };
        let xi = parse(parts.next())? as i64;
        let re = parse(parts.next())?;
        let im = parse(parts.next())?;
        if xi < -(n as i64) / 2 || xi >= n as i64 / 2 {
            return err(format!("{}:{}: xi = {xi} outside band", path.display(), lineno + 1));
        }
        spec.set(xi, Complex64::new(re, im));
    }
    Ok(spec)
}
