//! Gamma-factor closed form of the identity's right-hand side.
//!
//! The right-hand side is a product `I * J` of two factors:
//!
//! ```text
//!   I = 2^(1 - sigma1 - tau1 + n) * pi
//!       * Gamma(lambda1 - (n+1)/2) * Gamma(sigma1 + tau1 - lambda1 - (n-1)/2)
//!       / (Gamma(sigma1 - (n-1)/2) * Gamma(tau1 - (n-1)/2))
//!
//!   J = 2^(2 - sigma2 - tau2 + offset) * pi^n
//!       * Gamma(lambda2 - n) * Gamma(sigma2 + tau2 - lambda2)
//!       / (Gamma(sigma2) * Gamma(tau2))
//! ```
//!
//! The binary-power offset in `J` is where source displays of the identity
//! disagree (`+n` and `-n` both appear in print), so the library refuses to
//! bake one in: every evaluation names a [`VariantOffset`] explicitly, and the
//! discrepancy suite adjudicates numerically against direct quadrature of the
//! reduced integral. At `n = 1` the reduced `J` integral is literally the
//! auxiliary 2D integral with `alpha = lambda2 - 1`, which forces offset `0`;
//! the suite confirms the same offset for `n = 2, 3`. Variant `0` is therefore
//! the default everywhere a default is allowed (the CLI), but never in the
//! library API.

use std::fmt;

use num_complex::Complex64;

use crate::domain::{require_valid, BetaParams};
use crate::error::Result;
use crate::special::{cexp, log_gamma_named};

const LN_2: f64 = std::f64::consts::LN_2;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Candidate binary-power normalization of the `J` factor: the exponent is
/// `2 - sigma2 - tau2 + offset` with `offset` one of `+n`, `0`, `-n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariantOffset {
    PlusN,
    Zero,
    MinusN,
}

impl VariantOffset {
    pub const ALL: [VariantOffset; 3] = [Self::PlusN, Self::Zero, Self::MinusN];

    /// The numeric offset at rank `n`.
    pub fn offset(self, n: u32) -> f64 {
        match self {
            Self::PlusN => n as f64,
            Self::Zero => 0.0,
            Self::MinusN => -(n as f64),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::PlusN => "+n",
            Self::Zero => "0",
            Self::MinusN => "-n",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "+n" | "plus" | "+" => Some(Self::PlusN),
            "0" | "zero" => Some(Self::Zero),
            "-n" | "minus" | "-" => Some(Self::MinusN),
            _ => None,
        }
    }
}

impl fmt::Display for VariantOffset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Full diagnostic decomposition of one right-hand-side evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormBreakdown {
    pub variant: VariantOffset,
    /// Exponent of 2 in factor I: `1 - sigma1 - tau1 + n`.
    pub binary_exponent_i: Complex64,
    /// Numerator gamma arguments of I.
    pub gamma_numerator_i: [Complex64; 2],
    /// Denominator gamma arguments of I.
    pub gamma_denominator_i: [Complex64; 2],
    pub factor_i: Complex64,
    /// Exponent of 2 in factor J: `2 - sigma2 - tau2 + offset`.
    pub binary_exponent_j: Complex64,
    pub gamma_numerator_j: [Complex64; 2],
    pub gamma_denominator_j: [Complex64; 2],
    pub factor_j: Complex64,
    /// `factor_i * factor_j`.
    pub value: Complex64,
}

/// The first gamma factor `I` (depends on `lambda1, sigma1, tau1, n` only).
pub fn factor_i(p: &BetaParams) -> Result<Complex64> {
    let n = p.n as f64;
    let a1 = p.lambda1 - 0.5 * (n + 1.0);
    let a2 = p.sigma1 + p.tau1 - p.lambda1 - 0.5 * (n - 1.0);
    let d1 = p.sigma1 - 0.5 * (n - 1.0);
    let d2 = p.tau1 - 0.5 * (n - 1.0);
    let ln = (1.0 - p.sigma1 - p.tau1 + n) * LN_2
        + LN_PI
        + log_gamma_named(a1, "Gamma(lambda1 - (n+1)/2)")?
        + log_gamma_named(a2, "Gamma(sigma1 + tau1 - lambda1 - (n-1)/2)")?
        - log_gamma_named(d1, "Gamma(sigma1 - (n-1)/2)")?
        - log_gamma_named(d2, "Gamma(tau1 - (n-1)/2)")?;
    Ok(cexp(ln))
}

/// The second gamma factor `J` under the given binary-power variant.
pub fn factor_j(p: &BetaParams, variant: VariantOffset) -> Result<Complex64> {
    let n = p.n as f64;
    let a1 = p.lambda2 - n;
    let a2 = p.sigma2 + p.tau2 - p.lambda2;
    let ln = (2.0 - p.sigma2 - p.tau2 + variant.offset(p.n)) * LN_2
        + n * LN_PI
        + log_gamma_named(a1, "Gamma(lambda2 - n)")?
        + log_gamma_named(a2, "Gamma(sigma2 + tau2 - lambda2)")?
        - log_gamma_named(p.sigma2, "Gamma(sigma2)")?
        - log_gamma_named(p.tau2, "Gamma(tau2)")?;
    Ok(cexp(ln))
}

/// The right-hand side `I * J` under the given variant.
///
/// Requires the parameters to lie in the convergence region (use
/// [`factor_i`]/[`factor_j`] directly for out-of-region diagnostics).
pub fn rhs(p: &BetaParams, variant: VariantOffset) -> Result<Complex64> {
    require_valid(p)?;
    Ok(factor_i(p)? * factor_j(p, variant)?)
}

/// [`rhs`] with every intermediate quantity exposed.
pub fn breakdown(p: &BetaParams, variant: VariantOffset) -> Result<ClosedFormBreakdown> {
    require_valid(p)?;
    let n = p.n as f64;
    let fi = factor_i(p)?;
    let fj = factor_j(p, variant)?;
    Ok(ClosedFormBreakdown {
        variant,
        binary_exponent_i: 1.0 - p.sigma1 - p.tau1 + n,
        gamma_numerator_i: [
            p.lambda1 - 0.5 * (n + 1.0),
            p.sigma1 + p.tau1 - p.lambda1 - 0.5 * (n - 1.0),
        ],
        gamma_denominator_i: [p.sigma1 - 0.5 * (n - 1.0), p.tau1 - 0.5 * (n - 1.0)],
        factor_i: fi,
        binary_exponent_j: 2.0 - p.sigma2 - p.tau2 + variant.offset(p.n),
        gamma_numerator_j: [p.lambda2 - n, p.sigma2 + p.tau2 - p.lambda2],
        gamma_denominator_j: [p.sigma2, p.tau2],
        factor_j: fj,
        value: fi * fj,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * 1.0_f64.max(b.norm())
    }

    #[test]
    fn factor_i_frozen_values() {
        // n=1, (lambda1, sigma1, tau1) = (2, 3, 2): 2^(-3) pi G(1)G(3)/(G(3)G(2)) = pi/8.
        let p = BetaParams::real(1, 2.0, 2.0, 3.0, 3.0, 2.0, 2.0).unwrap();
        assert!(close(factor_i(&p).unwrap(), c(PI / 8.0, 0.0), 1e-14));
        // n=2, (3, 4, 3): 2^(-4) pi G(1.5)G(3.5)/(G(3.5)G(2.5)) = pi/24.
        let p = BetaParams::real(2, 3.0, 3.0, 4.0, 4.0, 3.0, 3.0).unwrap();
        assert!(close(factor_i(&p).unwrap(), c(PI / 24.0, 0.0), 1e-14));
        // n=3, (4, 5, 4): 2^(-5) pi G(2)G(4)/(G(4)G(3)) = pi/64.
        let p = BetaParams::real(3, 4.0, 4.0, 5.0, 5.0, 4.0, 4.0).unwrap();
        assert!(close(factor_i(&p).unwrap(), c(PI / 64.0, 0.0), 1e-14));
    }

    #[test]
    fn factor_j_frozen_values_per_variant() {
        // n=1, (lambda2, sigma2, tau2) = (2, 3, 2).
        let p = BetaParams::real(1, 2.0, 2.0, 3.0, 3.0, 2.0, 2.0).unwrap();
        assert!(close(
            factor_j(&p, VariantOffset::Zero).unwrap(),
            c(PI / 8.0, 0.0),
            1e-14
        ));
        assert!(close(
            factor_j(&p, VariantOffset::PlusN).unwrap(),
            c(PI / 4.0, 0.0),
            1e-14
        ));
        assert!(close(
            factor_j(&p, VariantOffset::MinusN).unwrap(),
            c(PI / 16.0, 0.0),
            1e-14
        ));
        // n=2, (3, 4, 3) variant 0: 2^(-5) pi^2 G(1)G(4)/(G(4)G(3)) = pi^2/64.
        let p = BetaParams::real(2, 3.0, 3.0, 4.0, 4.0, 3.0, 3.0).unwrap();
        assert!(close(
            factor_j(&p, VariantOffset::Zero).unwrap(),
            c(PI * PI / 64.0, 0.0),
            1e-14
        ));
        // n=3, (4, 5, 4) variant 0: 2^(-7) pi^3 G(1)G(5)/(G(5)G(4)) = pi^3/768.
        let p = BetaParams::real(3, 4.0, 4.0, 5.0, 5.0, 4.0, 4.0).unwrap();
        assert!(close(
            factor_j(&p, VariantOffset::Zero).unwrap(),
            c(PI.powi(3) / 768.0, 0.0),
            1e-14
        ));
    }

    #[test]
    fn variants_differ_by_powers_of_two() {
        let p = BetaParams::new(
            2,
            c(3.0, 0.4),
            c(3.0, -0.3),
            c(4.0, 0.2),
            c(4.0, -0.6),
            c(3.0, -0.2),
            c(3.0, 0.6),
        )
        .unwrap();
        let j0 = factor_j(&p, VariantOffset::Zero).unwrap();
        let jp = factor_j(&p, VariantOffset::PlusN).unwrap();
        let jm = factor_j(&p, VariantOffset::MinusN).unwrap();
        assert!(close(jp, j0 * 4.0, 1e-13));
        assert!(close(jm, j0 / 4.0, 1e-13));
    }

    #[test]
    fn rhs_frozen_values() {
        let p = BetaParams::real(1, 2.0, 2.0, 3.0, 3.0, 2.0, 2.0).unwrap();
        let v = rhs(&p, VariantOffset::Zero).unwrap();
        assert!(close(v, c(PI * PI / 64.0, 0.0), 1e-14));
        assert!((v.re - 0.154_212_568_767_021_22).abs() < 1e-15);

        let p = BetaParams::real(2, 3.0, 3.0, 4.0, 4.0, 3.0, 3.0).unwrap();
        assert!(close(
            rhs(&p, VariantOffset::Zero).unwrap(),
            c(PI.powi(3) / 1536.0, 0.0),
            1e-14
        ));
    }

    #[test]
    fn rhs_conjugation_symmetry() {
        // rhs(conjugated params with sigma_k <-> tau_k swapped) = conj(rhs).
        let p = BetaParams::new(
            2,
            c(3.0, 0.7),
            c(3.2, -0.4),
            c(4.1, 0.5),
            c(3.9, -0.2),
            c(3.4, -0.8),
            c(3.3, 0.9),
        )
        .unwrap();
        let swapped = BetaParams::new(
            p.n,
            p.lambda1.conj(),
            p.lambda2.conj(),
            p.tau1.conj(),
            p.tau2.conj(),
            p.sigma1.conj(),
            p.sigma2.conj(),
        )
        .unwrap();
        let a = rhs(&p, VariantOffset::Zero).unwrap();
        let b = rhs(&swapped, VariantOffset::Zero).unwrap();
        assert!(close(b, a.conj(), 1e-13));
    }

    #[test]
    fn rhs_rejects_invalid_params() {
        let p = BetaParams::real(2, 1.0, 3.0, 4.0, 4.0, 3.0, 3.0).unwrap();
        match rhs(&p, VariantOffset::Zero) {
            Err(Error::InvalidParams { report }) => {
                assert!(!report.conditions[0].holds);
            }
            other => panic!("expected invalid-params error, got {other:?}"),
        }
    }

    #[test]
    fn pole_errors_name_the_argument() {
        // lambda2 = n puts Gamma(lambda2 - n) on its pole. Validation passes
        // margins to the caller first, so probe factor_j directly.
        let p = BetaParams::real(1, 2.0, 1.0, 3.0, 3.0, 2.0, 2.0).unwrap();
        match factor_j(&p, VariantOffset::Zero) {
            Err(Error::GammaPole { context, .. }) => {
                assert_eq!(context, "Gamma(lambda2 - n)");
            }
            other => panic!("expected pole error, got {other:?}"),
        }
        // sigma1 = 0 at n=1 puts a denominator gamma of I on a pole.
        let p = BetaParams::real(1, 2.0, 2.0, 0.0, 3.0, 4.0, 2.0).unwrap();
        match factor_i(&p) {
            Err(Error::GammaPole { context, .. }) => {
                assert_eq!(context, "Gamma(sigma1 - (n-1)/2)");
            }
            other => panic!("expected pole error, got {other:?}"),
        }
    }

    #[test]
    fn breakdown_is_consistent() {
        let p = BetaParams::real(2, 3.0, 3.0, 4.0, 4.0, 3.0, 3.0).unwrap();
        let b = breakdown(&p, VariantOffset::Zero).unwrap();
        assert_eq!(b.factor_i, factor_i(&p).unwrap());
        assert_eq!(b.factor_j, factor_j(&p, VariantOffset::Zero).unwrap());
        assert_eq!(b.value, b.factor_i * b.factor_j);
        assert_eq!(b.binary_exponent_i, c(1.0 - 4.0 - 3.0 + 2.0, 0.0));
        assert_eq!(b.binary_exponent_j, c(2.0 - 4.0 - 3.0, 0.0));
        assert_eq!(b.gamma_numerator_j[0], c(1.0, 0.0));
    }
}
