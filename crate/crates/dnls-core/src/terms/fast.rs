//! Assembled right-hand sides of the gauge equation.
//!
//! The equation integrated for `z` is the exact image of the dNLS flow under
//! the gauge chain,
//!
//! ```text
//!     z_t - i z_xx = NR(-z^2 conj(z)_x) + A(z) - i mu NR(|z|^2 z)
//!                    + (i/16pi^4) ||z||_{L^4}^4 z  +  RC(z),
//! ```
//!
//! where `RC` collects the inclusion–exclusion completions of the resonant
//! splits: the doubly-counted diagonal line `xi1 = xi2 = xi3` of the cubic
//! terms and the pairwise/triple overlaps of the three quintic constraint
//! planes. Dropping `RC` (as the formal derivation does) changes the flow at
//! cubic order in the data; with `RC` included, a plane wave `A e^{ikx}`
//! evolves exactly as the chain of the corresponding dNLS solution.
//!
//! In fast mode everything collapses to three dealiased products plus scalar
//! multiples of `zhat`:
//!
//! ```text
//!     G(z) = F(-z^2 conj(z)_x) + F((i/2)|z|^4 z) - i mu F(|z|^2 z) + i s(z) zhat,
//!     s(z) = -P2/pi - Lam/(4 pi) + 2 mu^2 - (8 pi^3 - 1) Lam / (16 pi^4),
//! ```
//!
//! with `P2 = sum xi |zhat|^2` and `Lam = ||z||_{L^4}^4`. Oracle mode
//! assembles the same value from region-partitioned direct sums and the
//! explicit completion terms; the two agree to round-off.

use num_complex::Complex64;

use super::chain::{b_region_exact, d_term_exact, nf_region_deriv_exact};
use super::direct::{eval_term, TermKind};
use super::ComparisonRule;
use crate::spectral::{derivative, l4_fourth_power, multiply_dealiased, multiply_dealiased_to, Spectrum};
use crate::TWO_PI;

/// How to evaluate the assembled right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsMode {
    /// Dealiased products, O(N log N).
    Fast,
    /// Direct constrained summation, O(N^5); for verification.
    Oracle,
}

fn p2_weighted_mass(z: &Spectrum) -> f64 {
    z.iter().map(|(xi, c)| xi as f64 * c.norm_sqr()).sum()
}

/// `F(-z^2 conj(z)_x)` via dealiased products.
pub(crate) fn full_cubic_deriv(z: &Spectrum) -> Spectrum {
    let zx = derivative(z, 1);
    multiply_dealiased(&[(z, false), (z, false), (&zx, true)])
        .expect("arity 3 on matching grids")
        .scale(Complex64::new(-1.0, 0.0))
}

/// `F(|z|^2 z)`.
pub(crate) fn full_cubic_plain(z: &Spectrum) -> Spectrum {
    multiply_dealiased(&[(z, false), (z, true), (z, false)]).expect("arity 3 on matching grids")
}

/// `F((i/2) |z|^4 z)`.
pub(crate) fn full_quintic(z: &Spectrum) -> Spectrum {
    multiply_dealiased(&[(z, false), (z, true), (z, false), (z, true), (z, false)])
        .expect("arity 5 on matching grids")
        .scale(Complex64::new(0.0, 0.5))
}

/// Pairwise quintic overlap `S_AB(xi) = (i/(2(2pi)^2)) zhat(xi)^2 *
/// sum_{a+b-c=xi} conj(zhat(a)) conj(zhat(b)) zhat(c)`.
pub fn quintic_overlap_pair(z: &Spectrum) -> Spectrum {
    let n = z.n();
    // conv3(xi) = 2pi * F(conj(z)^2 z)(-xi), needed for |xi| <= N/2
    let wide = multiply_dealiased_to(&[(z, true), (z, true), (z, false)], 2 * n)
        .expect("arity 3 on matching grids");
    let mut out = Spectrum::zeros(n);
    for (xi, c) in z.iter() {
        let conv3 = TWO_PI * wide.coeff(-xi);
        out.set(xi, Complex64::new(0.0, 0.5 / (TWO_PI * TWO_PI)) * c * c * conv3);
    }
    out
}

/// Triple quintic overlap `S_ABC(xi) = (i/(2(2pi)^2)) zhat(xi)^3 *
/// conj( sum_{a+b=2xi} zhat(a) zhat(b) )`.
pub fn quintic_overlap_triple(z: &Spectrum) -> Spectrum {
    let n = z.n();
    // conv2(eta) = sqrt(2pi) * F(z^2)(eta), needed for |eta| <= N
    let wide = multiply_dealiased_to(&[(z, false), (z, false)], 2 * n)
        .expect("arity 2 on matching grids");
    let mut out = Spectrum::zeros(n);
    for (xi, c) in z.iter() {
        let conv2 = crate::SQRT_2PI * wide.coeff(2 * xi);
        out.set(xi, Complex64::new(0.0, 0.5 / (TWO_PI * TWO_PI)) * c * c * c * conv2.conj());
    }
    out
}

/// The resonant completion `RC(z)`: what must be added to the four displayed
/// terms so that the gauge equation is exactly the chain image of dNLS.
///
/// `RC = -(i/2pi) xi |zhat|^2 zhat + (i mu/2pi) |zhat|^2 zhat - 3 S_AB + S_ABC`.
pub fn resonant_completion(z: &Spectrum, mu: f64) -> Spectrum {
    let mut out = Spectrum::zeros(z.n());
    for (xi, c) in z.iter() {
        let line = Complex64::new(0.0, -xi as f64 / TWO_PI) * c.norm_sqr() * c
            + Complex64::new(0.0, mu / TWO_PI) * c.norm_sqr() * c;
        out.set(xi, line);
    }
    let pair = quintic_overlap_pair(z);
    let triple = quintic_overlap_triple(z);
    out.axpy(Complex64::new(-3.0, 0.0), &pair).axpy(Complex64::new(1.0, 0.0), &triple)
}

/// The four displayed terms of the gauge equation without the resonant
/// completion (the linear `i z_xx` part excluded). Retained for term-level
/// verification; the integrator uses [`gauge_rhs`].
pub fn gauge_rhs_literal(z: &Spectrum, mu: f64, rule: &ComparisonRule) -> Spectrum {
    let lam = l4_fourth_power(z);
    let nr_d = eval_term(TermKind::NrDeriv, z, mu, rule);
    let nr_c = eval_term(TermKind::NrCubic, z, mu, rule);
    let aq = eval_term(TermKind::AQuintic, z, mu, rule);
    nr_d.axpy(Complex64::new(1.0, 0.0), &aq)
        .axpy(Complex64::new(0.0, -mu), &nr_c)
        .axpy(Complex64::new(0.0, lam / (16.0 * std::f64::consts::PI.powi(4))), z)
}

/// Full nonlinear right-hand side of the gauge equation (`i z_xx` excluded).
pub fn gauge_rhs(z: &Spectrum, mu: f64, rule: &ComparisonRule, mode: RhsMode) -> Spectrum {
    match mode {
        RhsMode::Fast => {
            let pi = std::f64::consts::PI;
            let lam = l4_fourth_power(z);
            let p2 = p2_weighted_mass(z);
            let s = -p2 / pi - lam / (4.0 * pi) + 2.0 * mu * mu
                - (8.0 * pi.powi(3) - 1.0) * lam / (16.0 * pi.powi(4));
            let t_d = full_cubic_deriv(z);
            let t_q = full_quintic(z);
            let t_c = full_cubic_plain(z);
            t_d.axpy(Complex64::new(1.0, 0.0), &t_q)
                .axpy(Complex64::new(0.0, -mu), &t_c)
                .axpy(Complex64::new(0.0, s), z)
        }
        RhsMode::Oracle => {
            // NR(-z^2 conj(z)_x) assembled from the region partition of S_xi:
            // sum over {xi2 not in {xi1,xi3}} = 2 * sum over S_xi - diagonal |xi1|=|xi3|
            let regions = b_region_exact(z, rule, super::Region::B1)
                .axpy(Complex64::new(1.0, 0.0), &b_region_exact(z, rule, super::Region::B2))
                .axpy(Complex64::new(1.0, 0.0), &b_region_exact(z, rule, super::Region::B3))
                .axpy(Complex64::new(1.0, 0.0), &nf_region_deriv_exact(z, rule));
            let nr_d = regions
                .scale(Complex64::new(2.0, 0.0))
                .axpy(Complex64::new(-1.0, 0.0), &d_term_exact(z));
            let lam = l4_fourth_power(z);
            let aq = eval_term(TermKind::AQuintic, z, mu, rule);
            let nr_c = eval_term(TermKind::NrCubic, z, mu, rule);
            nr_d.axpy(Complex64::new(1.0, 0.0), &aq)
                .axpy(Complex64::new(0.0, -mu), &nr_c)
                .axpy(
                    Complex64::new(0.0, lam / (16.0 * std::f64::consts::PI.powi(4))),
                    z,
                )
                .axpy(Complex64::new(1.0, 0.0), &resonant_completion(z, mu))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_smooth;
    use crate::SQRT_2PI;

    #[test]
    fn fast_equals_oracle() {
        let rule = ComparisonRule::default();
        for seed in 0..20 {
            let z = random_smooth(seed, 16, 0.3, 0.8);
            let mu = z.l2_norm_sq() / TWO_PI;
            let fast = gauge_rhs(&z, mu, &rule, RhsMode::Fast);
            let oracle = gauge_rhs(&z, mu, &rule, RhsMode::Oracle);
            for (a, b) in fast.coeffs().iter().zip(oracle.coeffs()) {
                assert!((a - b).norm() < 1e-11, "fast/oracle mismatch: {a} vs {b}");
            }
        }
    }

    #[test]
    fn literal_rhs_single_mode_keeps_only_l4_term() {
        // e^{ix}: the constrained sums are empty and only the L^4 term
        // survives: (i/16pi^4) * 2pi * zhat = (i/8pi^3) zhat
        let rule = ComparisonRule::default();
        let z = Spectrum::single_mode(16, 1, Complex64::new(1.0, 0.0));
        let lit = gauge_rhs_literal(&z, 1.0, &rule);
        let want = Complex64::new(0.0, 1.0 / (8.0 * std::f64::consts::PI.powi(3))) * SQRT_2PI;
        assert!((lit.coeff(1) - want).norm() < 1e-13, "{} vs {}", lit.coeff(1), want);
        for (xi, c) in lit.iter() {
            if xi != 1 {
                assert!(c.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_rhs_single_mode_carries_resonant_phase() {
        // the completed equation adds -i k mu zhat on a plane wave A e^{ikx}
        let rule = ComparisonRule::default();
        let amp = 0.7;
        let k = 2i64;
        let z = Spectrum::single_mode(32, k, Complex64::new(amp, 0.0));
        let mu = amp * amp;
        let g = gauge_rhs(&z, mu, &rule, RhsMode::Fast);
        let lam = TWO_PI * amp.powi(4);
        let expect = Complex64::new(
            0.0,
            -(k as f64) * mu + lam / (16.0 * std::f64::consts::PI.powi(4)),
        ) * z.coeff(k);
        assert!((g.coeff(k) - expect).norm() < 1e-12, "{} vs {}", g.coeff(k), expect);
    }

    #[test]
    fn zero_maps_to_zero() {
        let rule = ComparisonRule::default();
        let z = Spectrum::zeros(16);
        assert_eq!(gauge_rhs(&z, 0.0, &rule, RhsMode::Fast).l2_norm(), 0.0);
        assert_eq!(gauge_rhs_literal(&z, 0.0, &rule).l2_norm(), 0.0);
    }
}
