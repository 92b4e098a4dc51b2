//! Normal-form chain operator and the exact Duhamel integrand.
//!
//! Differentiation by parts on the `nf` region of `S_xi` trades the cubic
//! derivative sum for a boundary term plus three chain terms in which the
//! full right-hand side `G` is substituted into one slot of the triple:
//!
//! ```text
//!     C_l(z; G)(xi) = (1/2pi) sum_{S_xi cap nf} (xi2/Psi) [G in slot l],
//! ```
//!
//! with the slot-2 substitution conjugated. All named quintic/septic terms of
//! the expansion are the chain applied to one constituent of `G`; the tests
//! pin the scalar relations between these exact-normalized sums and the
//! display-normalized [`eval_term`](super::eval_term) values.

use num_complex::Complex64;

use super::direct::{per_output, Zv};
use super::fast::{full_cubic_deriv, gauge_rhs, RhsMode};
use super::{phase_psi, region_of, ComparisonRule, Region};
use crate::spectral::Spectrum;
use crate::TWO_PI;

/// Which slot of the `nf` triple receives the substituted spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainSlot {
    First,
    Second,
    Third,
}

/// `(i/2pi) sum_{S_xi cap region} xi2 z1 conj(z2) z3` (exact normalization).
pub(crate) fn b_region_exact(z: &Spectrum, rule: &ComparisonRule, want: Region) -> Spectrum {
    let v = Zv::new(z);
    let half = z.n() as i64 / 2;
    per_output(z.n(), |xo| {
        let mut acc = Complex64::ZERO;
        for x1 in -half..half {
            for x2 in -half..half {
                let x3 = xo - x1 + x2;
                if !v.in_band(x3) || x2 == x1 || x2 == x3 || x1.abs() < x3.abs() {
                    continue;
                }
                if region_of(rule, x1, x2, x3) != want {
                    continue;
                }
                acc += x2 as f64 * v.get(x1) * v.get(x2).conj() * v.get(x3);
            }
        }
        Complex64::new(0.0, 1.0 / TWO_PI) * acc
    })
}

/// The `nf`-region part of the derivative sum (no `1/Psi`), exact
/// normalization. Together with the three `b` regions this reconstructs
/// `sum_{S_xi}`.
pub(crate) fn nf_region_deriv_exact(z: &Spectrum, rule: &ComparisonRule) -> Spectrum {
    b_region_exact(z, rule, Region::Nf)
}

/// Diagonal correction `(i/2pi) sum_{S' cap {|xi1| = |xi3|}} xi2 (...)`:
/// the symmetrization `S' -> 2 S_xi` double-counts these tuples.
pub(crate) fn d_term_exact(z: &Spectrum) -> Spectrum {
    let v = Zv::new(z);
    let half = z.n() as i64 / 2;
    per_output(z.n(), |xo| {
        let mut acc = Complex64::ZERO;
        for x1 in -half..half {
            for x2 in -half..half {
                // x3 in {x1, -x1}; a single tuple when x1 = 0
                for (idx, x3) in [x1, -x1].into_iter().enumerate() {
                    if idx == 1 && x3 == x1 {
                        continue;
                    }
                    if !v.in_band(x3) || x2 == x1 || x2 == x3 || x1 - x2 + x3 != xo {
                        continue;
                    }
                    acc += x2 as f64 * v.get(x1) * v.get(x2).conj() * v.get(x3);
                }
            }
        }
        Complex64::new(0.0, 1.0 / TWO_PI) * acc
    })
}

/// Exact-normalized boundary term `(1/2pi) sum_{S_xi cap nf} (xi2/Psi) (...)`;
/// the chain with `z` itself in slot 1. Equals `sqrt(2pi)` times the
/// display-normalized `eval_term(Nf, ..)`.
pub fn nf_exact(z: &Spectrum, rule: &ComparisonRule) -> Spectrum {
    chain_term(z, z, ChainSlot::First, rule)
}

/// Chain operator: substitute `f` into the given slot of the `nf` sum
/// (conjugated in slot 2), weight `xi2/Psi`, exact normalization `1/2pi`.
///
/// With `f = z` in slot 1 this is the boundary term itself.
pub fn chain_term(z: &Spectrum, f: &Spectrum, slot: ChainSlot, rule: &ComparisonRule) -> Spectrum {
    let v = Zv::new(z);
    let fv = Zv::new(f);
    let half = z.n() as i64 / 2;
    per_output(z.n(), |xo| {
        let mut acc = Complex64::ZERO;
        for x1 in -half..half {
            for x2 in -half..half {
                let x3 = xo - x1 + x2;
                if !v.in_band(x3) || x2 == x1 || x2 == x3 || x1.abs() < x3.abs() {
                    continue;
                }
                if !rule.much_less(x1, x2) {
                    continue;
                }
                let psi = phase_psi(x1, x2, x3);
                debug_assert_ne!(psi, 0);
                let w = x2 as f64 / psi as f64;
                let term = match slot {
                    ChainSlot::First => fv.get(x1) * v.get(x2).conj() * v.get(x3),
                    ChainSlot::Second => v.get(x1) * fv.get(x2).conj() * v.get(x3),
                    ChainSlot::Third => v.get(x1) * v.get(x2).conj() * fv.get(x3),
                };
                acc += w * term;
            }
        }
        acc / TWO_PI
    })
}

/// The exact Duhamel integrand `N(z)`: with `y = e^{i t xi^2} zhat`,
///
/// ```text
///     dy/dt = d/dt[ 2 e^{i t xi^2} NF(z) ] + e^{i t xi^2} N(z),
/// ```
///
/// so that integrating on `[0, t]` gives
///
/// ```text
///     z(t) = e^{it dxx} z0 + 2 NF(z)(t) - 2 e^{it dxx} NF(z0)
///            + int_0^t e^{i(t-t') dxx} N(z)(t') dt'.
/// ```
///
/// `N` collects the region sums away from `nf`, the diagonal correction, the
/// non-normal-formed quintic/L^4/completion terms, and the three chain terms
/// with the full right-hand side substituted.
pub fn duhamel_n(z: &Spectrum, mu: f64, rule: &ComparisonRule) -> Spectrum {
    let pi = std::f64::consts::PI;
    let g = gauge_rhs(z, mu, rule, RhsMode::Fast);
    let b_sum = b_region_exact(z, rule, Region::B1)
        .axpy(Complex64::new(1.0, 0.0), &b_region_exact(z, rule, Region::B2))
        .axpy(Complex64::new(1.0, 0.0), &b_region_exact(z, rule, Region::B3));
    let chains = chain_term(z, &g, ChainSlot::First, rule)
        .axpy(Complex64::new(1.0, 0.0), &chain_term(z, &g, ChainSlot::Second, rule))
        .axpy(Complex64::new(1.0, 0.0), &chain_term(z, &g, ChainSlot::Third, rule));

    // G - NR(-z^2 conj(z)_x) = A - i mu NR_c + (i/16pi^4) Lam z + RC, with
    // NR = full product - (i/pi) P2 z + (i/2pi) xi |zhat|^2 zhat
    let full_d = full_cubic_deriv(z);
    let p2: f64 = z.iter().map(|(xi, c)| xi as f64 * c.norm_sqr()).sum();
    let mut rest = g.axpy(Complex64::new(-1.0, 0.0), &full_d);
    for xi in rest.xi_min()..=rest.xi_max() {
        let c = z.coeff(xi);
        let nr_res = Complex64::new(0.0, -p2 / pi) * c
            + Complex64::new(0.0, xi as f64 / TWO_PI) * c.norm_sqr() * c;
        let cur = rest.coeff(xi);
        rest.set(xi, cur - nr_res);
    }

    b_sum
        .scale(Complex64::new(2.0, 0.0))
        .axpy(Complex64::new(-1.0, 0.0), &d_term_exact(z))
        .axpy(Complex64::new(1.0, 0.0), &rest)
        .axpy(Complex64::new(-2.0, 0.0), &chains)
}
