//! Torus grid and Fourier analysis with the `1/sqrt(2pi)` convention.
//!
//! The spatial transform pair is
//!
//! ```text
//!     fhat(xi) = (sqrt(2pi)/N) sum_j e^{-i xi x_j} f(x_j),   x_j = 2pi j/N,
//!     f(x_j)   = (1/sqrt(2pi)) sum_xi e^{i xi x_j} fhat(xi),
//! ```
//!
//! so that discrete coefficients approximate `(1/sqrt(2pi)) int e^{-i xi x} f dx`
//! directly and Parseval reads `sum_xi |fhat|^2 = int |f|^2 dx`. The discrete
//! frequency band is `xi in {-N/2, ..., N/2-1}` with `N` a power of two.
//!
//! Nonlinear products are evaluated pointwise on a zero-padded grid sized to
//! the product arity, so cubic through septic products are alias-free within
//! the retained band.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::CoreError;
use crate::{SQRT_2PI, TWO_PI};

/// Complex samples of a function on the 2pi-periodic grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    n: usize,
    samples: Vec<Complex64>,
}

/// Complex Fourier coefficients indexed by `xi in {-N/2, ..., N/2-1}`,
/// stored in ascending-xi order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    n: usize,
    coeffs: Vec<Complex64>,
}

/// Frequency band selector: a Littlewood-Paley shell or a sharp cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandSelector {
    /// `k = 0` keeps only `xi = 0`; `k >= 1` keeps `2^{k-1} <= |xi| < 2^k`.
    Dyadic(u32),
    /// Keeps `|xi| <= n0`.
    Low(u32),
    /// Keeps `|xi| > n0`.
    High(u32),
}

fn check_grid_size(n: usize) -> Result<(), CoreError> {
    if n >= 8 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(CoreError::InvalidGridSize(n))
    }
}

impl TorusField {
    pub fn new(samples: Vec<Complex64>) -> Result<Self, CoreError> {
        check_grid_size(samples.len())?;
        if let Some(i) = samples.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(CoreError::NonFiniteSample(i));
        }
        Ok(Self { n: samples.len(), samples })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, samples: vec![Complex64::ZERO; n] }
    }

    /// Sample the closure `f` at the grid points `x_j = 2pi j / n`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self, CoreError> {
        check_grid_size(n)?;
        let samples = (0..n).map(|j| f(TWO_PI * j as f64 / n as f64)).collect();
        Self::new(samples)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// CSV rows `j,re,im`, one per grid point.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,re,im\n");
        for (j, c) in self.samples.iter().enumerate() {
            s.push_str(&format!("{},{:.16e},{:.16e}\n", j, c.re, c.im));
        }
        s
    }
}

impl Spectrum {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, CoreError> {
        check_grid_size(coeffs.len())?;
        Ok(Self { n: coeffs.len(), coeffs })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, coeffs: vec![Complex64::ZERO; n] }
    }

    /// Single nonzero mode `amp * e^{i k x}`, i.e. coefficient `sqrt(2pi) * amp` at `xi = k`.
    pub fn single_mode(n: usize, k: i64, amp: Complex64) -> Self {
        let mut s = Self::zeros(n);
        s.set(k, amp * SQRT_2PI);
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Smallest frequency in the band, `-N/2`.
    pub fn xi_min(&self) -> i64 {
        -(self.n as i64) / 2
    }

    /// Largest frequency in the band, `N/2 - 1`.
    pub fn xi_max(&self) -> i64 {
        self.n as i64 / 2 - 1
    }

    #[inline]
    pub fn in_band(&self, xi: i64) -> bool {
        xi >= self.xi_min() && xi <= self.xi_max()
    }

    /// Coefficient at `xi`; zero outside the band.
    #[inline]
    pub fn coeff(&self, xi: i64) -> Complex64 {
        if self.in_band(xi) {
            self.coeffs[(xi - self.xi_min()) as usize]
        } else {
            Complex64::ZERO
        }
    }

    /// Set the coefficient at `xi`; panics outside the band.
    #[inline]
    pub fn set(&mut self, xi: i64, v: Complex64) {
        let min = self.xi_min();
        self.coeffs[(xi - min) as usize] = v;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Iterate `(xi, coefficient)` in ascending xi.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let min = self.xi_min();
        self.coeffs.iter().enumerate().map(move |(i, &c)| (min + i as i64, c))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `sum_xi |fhat(xi)|^2`, i.e. the squared L^2 norm by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Pointwise linear combination `self + alpha * other`.
    pub fn axpy(&self, alpha: Complex64, other: &Spectrum) -> Spectrum {
        assert_eq!(self.n, other.n);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Spectrum { n: self.n, coeffs }
    }

    pub fn scale(&self, alpha: Complex64) -> Spectrum {
        Spectrum { n: self.n, coeffs: self.coeffs.iter().map(|c| c * alpha).collect() }
    }

    /// CSV rows `xi,re,im` sorted by xi ascending. `header_comment`, when
    /// present, is emitted as a leading `# ...` line (used for term dumps).
    pub fn to_csv(&self, header_comment: Option<&str>) -> String {
        let mut s = String::new();
        if let Some(h) = header_comment {
            s.push_str(&format!("# {}\n", h));
        }
        s.push_str("xi,re,im\n");
        for (xi, c) in self.iter() {
            s.push_str(&format!("{},{:.16e},{:.16e}\n", xi, c.re, c.im));
        }
        s
    }
}

// ---------------------------------------------------------------------------
// FFT engine
// ---------------------------------------------------------------------------

type PlanKey = (usize, bool);
type PlanCache = Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Ascending-xi order -> FFT bin order (bin k holds xi = k for k < N/2, xi = k - N otherwise).
fn to_fft_order(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let half = n / 2;
    let mut out = vec![Complex64::ZERO; n];
    for (i, &c) in coeffs.iter().enumerate() {
        let xi = i as i64 - half as i64;
        let bin = if xi >= 0 { xi as usize } else { (xi + n as i64) as usize };
        out[bin] = c;
    }
    out
}

fn from_fft_order(bins: &[Complex64]) -> Vec<Complex64> {
    let n = bins.len();
    let half = n / 2;
    let mut out = vec![Complex64::ZERO; n];
    for (bin, &c) in bins.iter().enumerate() {
        let xi = if bin < half { bin as i64 } else { bin as i64 - n as i64 };
        out[(xi + half as i64) as usize] = c;
    }
    out
}

/// Unscaled in-place FFT over an arbitrary power-of-two length; used by the
/// temporal transforms of the space-time norms.
pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    plan(buf.len(), inverse).process(buf);
}

/// Forward transform: `fhat(xi) = (sqrt(2pi)/N) sum_j e^{-i xi x_j} f_j`.
pub fn analyze(field: &TorusField) -> Spectrum {
    let n = field.n;
    let mut buf = field.samples.clone();
    plan(n, false).process(&mut buf);
    let scale = SQRT_2PI / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    Spectrum { n, coeffs: from_fft_order(&buf) }
}

/// Inverse transform: `f_j = (1/sqrt(2pi)) sum_xi e^{i xi x_j} fhat(xi)`.
pub fn synthesize(spec: &Spectrum) -> TorusField {
    let n = spec.n;
    let mut buf = to_fft_order(&spec.coeffs);
    plan(n, true).process(&mut buf);
    let scale = 1.0 / SQRT_2PI;
    for c in &mut buf {
        *c *= scale;
    }
    TorusField { n, samples: buf }
}

// ---------------------------------------------------------------------------
// Norms and multipliers
// ---------------------------------------------------------------------------

/// Japanese bracket `<xi> = (1 + xi^2)^{1/2}`.
#[inline]
pub fn bracket(xi: i64) -> f64 {
    (1.0 + (xi as f64) * (xi as f64)).sqrt()
}

/// `( sum_xi <xi>^{2s} |fhat(xi)|^2 )^{1/2}`.
pub fn sobolev_norm(spec: &Spectrum, s: f64) -> f64 {
    spec.iter()
        .map(|(xi, c)| bracket(xi).powf(2.0 * s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Bessel potential `J^s`: multiply coefficients by `<xi>^s`.
pub fn bessel_apply(spec: &Spectrum, s: f64) -> Spectrum {
    let mut out = spec.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let xi = i as i64 - spec.n as i64 / 2;
        *c *= bracket(xi).powf(s);
    }
    out
}

/// Spectral derivative of the given order: multiply by `(i xi)^order`.
pub fn derivative(spec: &Spectrum, order: u32) -> Spectrum {
    let mut out = spec.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let xi = (i as i64 - spec.n as i64 / 2) as f64;
        *c *= Complex64::new(0.0, xi).powu(order);
    }
    out
}

impl BandSelector {
    pub fn keeps(&self, xi: i64) -> bool {
        let a = xi.unsigned_abs();
        match *self {
            BandSelector::Dyadic(0) => xi == 0,
            BandSelector::Dyadic(k) => (1u64 << (k - 1)) <= a && a < (1u64 << k),
            BandSelector::Low(n0) => a <= n0 as u64,
            BandSelector::High(n0) => a > n0 as u64,
        }
    }
}

/// Zero every coefficient outside the selected band.
pub fn band_select(spec: &Spectrum, sel: BandSelector) -> Spectrum {
    let mut out = spec.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let xi = i as i64 - spec.n as i64 / 2;
        if !sel.keeps(xi) {
            *c = Complex64::ZERO;
        }
    }
    out
}

/// `(int |f|^p dx)^{1/p}` by trapezoidal quadrature on the sample grid;
/// `p = f64::INFINITY` gives the sup norm.
pub fn lp_norm(field: &TorusField, p: f64) -> Result<f64, CoreError> {
    if !(p >= 1.0) {
        return Err(CoreError::InvalidLebesgueExponent(p));
    }
    if p.is_infinite() {
        return Ok(field.samples.iter().map(|c| c.norm()).fold(0.0, f64::max));
    }
    let dx = TWO_PI / field.n as f64;
    let sum: f64 = field.samples.iter().map(|c| c.norm().powf(p)).sum();
    Ok((sum * dx).powf(1.0 / p))
}

// ---------------------------------------------------------------------------
// Dealiased products
// ---------------------------------------------------------------------------

fn padded_size(count: usize, n: usize) -> usize {
    // zero padding sized to the product arity: M >= (count+1)/2 * N,
    // rounded up to a power of two, keeps degree-`count` products alias-free
    let need = (count + 1) * n / 2;
    need.next_power_of_two()
}

fn embed(spec: &Spectrum, m: usize) -> Spectrum {
    let mut out = Spectrum::zeros(m);
    for (xi, c) in spec.iter() {
        out.set(xi, c);
    }
    out
}

fn truncate(spec: &Spectrum, n: usize) -> Spectrum {
    let mut out = Spectrum::zeros(n);
    for xi in out.xi_min()..=out.xi_max() {
        out.set(xi, spec.coeff(xi));
    }
    out
}

/// Pointwise product of the factors (conjugating those flagged), evaluated on
/// a zero-padded grid and re-analyzed, truncated to band `out_n`.
///
/// Exact to round-off whenever the true product is band-limited within `out_n`.
pub fn multiply_dealiased_to(
    factors: &[(&Spectrum, bool)],
    out_n: usize,
) -> Result<Spectrum, CoreError> {
    let count = factors.len();
    if !(2..=7).contains(&count) {
        return Err(CoreError::InvalidProductArity(count));
    }
    let n = factors[0].0.n();
    for (f, _) in factors {
        if f.n() != n {
            return Err(CoreError::GridMismatch(n, f.n()));
        }
    }
    let m = padded_size(count, n.max(out_n));
    let mut prod = vec![Complex64::new(1.0, 0.0); m];
    for &(spec, conj) in factors {
        let f = synthesize(&embed(spec, m));
        for (p, s) in prod.iter_mut().zip(f.samples()) {
            *p *= if conj { s.conj() } else { *s };
        }
    }
    // each pointwise product of two fields carries the 1/sqrt(2pi) weight of
    // the convolution theorem automatically through the transform pair
    let big = analyze(&TorusField { n: m, samples: prod });
    Ok(truncate(&big, out_n))
}

/// Dealiased product truncated to the factors' own band.
pub fn multiply_dealiased(factors: &[(&Spectrum, bool)]) -> Result<Spectrum, CoreError> {
    let n = factors.first().map(|(f, _)| f.n()).unwrap_or(8);
    multiply_dealiased_to(factors, n)
}

/// `int |f|^4 dx` evaluated alias-free (quartic integrand on a padded grid).
pub fn l4_fourth_power(spec: &Spectrum) -> f64 {
    let m = padded_size(4, spec.n());
    let f = synthesize(&embed(spec, m));
    let dx = TWO_PI / m as f64;
    f.samples().iter().map(|c| c.norm_sqr() * c.norm_sqr()).sum::<f64>() * dx
}

// ---------------------------------------------------------------------------
// Random data
// ---------------------------------------------------------------------------

/// Seeded random spectrum with `|fhat(xi)| = <xi>^{-s-1/2-decay_margin}` and
/// uniform phases: borderline H^{s+decay_margin} data for smoothing runs.
pub fn random_hs(seed: u64, s: f64, n: usize, decay_margin: f64) -> Spectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Spectrum::zeros(n);
    let expo = -(s + 0.5 + decay_margin);
    for xi in out.xi_min()..=out.xi_max() {
        let amp = bracket(xi).powf(expo);
        let phase: f64 = rng.gen_range(0.0..TWO_PI);
        out.set(xi, Complex64::from_polar(amp, phase));
    }
    out
}

/// Seeded random spectrum with exponentially decaying modulus, rescaled to the
/// requested L^2 norm. Default generator for small-data experiments.
pub fn random_smooth(seed: u64, n: usize, decay: f64, l2: f64) -> Spectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Spectrum::zeros(n);
    for xi in out.xi_min()..=out.xi_max() {
        let amp = (-decay * xi.abs() as f64).exp();
        let phase: f64 = rng.gen_range(0.0..TWO_PI);
        out.set(xi, Complex64::from_polar(amp, phase));
    }
    let norm = out.l2_norm();
    if norm > 0.0 {
        out = out.scale(Complex64::new(l2 / norm, 0.0));
    }
    out
}
