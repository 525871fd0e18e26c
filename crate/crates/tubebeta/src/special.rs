//! Complex special functions: principal-branch bi-powers, the complex
//! log-gamma, and the closed forms of the two scalar integrals the reduction
//! chain bottoms out on.
//!
//! Conventions used throughout the crate:
//!
//! - `Log` is the principal branch, `Im Log in (-pi, pi]`.
//! - The bi-power with exponent pair `(l, m)` is
//!
//!   ```text
//!   a^{l|m} := a^l * conj(a)^m = exp(l*Log(a) + m*conj(Log(a)))
//!   ```
//!
//!   defined here only for `Re a > 0`, where both factor arguments lie in
//!   `(-pi/2, pi/2)` and no branch ambiguity exists. Every base this crate
//!   raises to a bi-power (`1+u1` and the horn factor `H = 1+u2 - sum z^2/(1+u1)`)
//!   has strictly positive real part on the tube domain, so the guard is an
//!   invariant check, not a restriction.
//! - `log_gamma` is the analytic continuation of `ln Gamma` from the positive
//!   real axis (real there, conjugate-symmetric, continuous from above on the
//!   negative real axis). Its imaginary part is *not* folded into `(-pi, pi]`.

use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Exponent pair `(hol, anti)` of a bi-power `a^{hol|anti} = a^hol * conj(a)^anti`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiExponent {
    /// Exponent of the holomorphic factor `a^hol`.
    pub hol: Complex64,
    /// Exponent of the antiholomorphic factor `conj(a)^anti`.
    pub anti: Complex64,
}

impl BiExponent {
    pub const fn new(hol: Complex64, anti: Complex64) -> Self {
        Self { hol, anti }
    }

    /// Both components real.
    pub fn real(hol: f64, anti: f64) -> Self {
        Self::new(Complex64::new(hol, 0.0), Complex64::new(anti, 0.0))
    }

    /// Plain holomorphic power `a^l`.
    pub fn holomorphic(l: Complex64) -> Self {
        Self::new(l, Complex64::ZERO)
    }

    /// `Re(hol + anti)`: the modulus decay rate, `|a^{l|m}|` on rays scales as
    /// `|a|^{Re(l+m)}` up to the bounded `exp(-arg(a) * Im(l-m))` twist.
    pub fn total_re(&self) -> f64 {
        self.hol.re + self.anti.re
    }

    /// Exponent pair of `conj(a^{hol|anti})` as a bi-power of `a` itself:
    /// `conj(a^{l|m}) = a^{conj(m)|conj(l)}`.
    pub fn conj_swap(&self) -> Self {
        Self::new(self.anti.conj(), self.hol.conj())
    }
}

impl Add for BiExponent {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.hol + rhs.hol, self.anti + rhs.anti)
    }
}

impl Sub for BiExponent {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.hol - rhs.hol, self.anti - rhs.anti)
    }
}

impl Neg for BiExponent {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.hol, -self.anti)
    }
}

/// Principal log of a base in the right half-plane, split out because the
/// integrand evaluators combine several of these before a single `exp`.
#[inline]
pub(crate) fn guarded_log(a: Complex64) -> Result<Complex64> {
    if !(a.re > 0.0) {
        return Err(if a == Complex64::ZERO {
            Error::ZeroBase
        } else {
            Error::BranchGuard { base: a }
        });
    }
    Ok(Complex64::new(0.5 * a.norm_sqr().ln(), a.im.atan2(a.re)))
}

/// `exp` of a complex number, via polar assembly (one real exp + sin/cos).
#[inline]
pub(crate) fn cexp(w: Complex64) -> Complex64 {
    let (s, c) = w.im.sin_cos();
    let r = w.re.exp();
    Complex64::new(r * c, r * s)
}

/// The bi-power `a^{l|m} = exp(l*Log a + m*conj(Log a))` for `Re a > 0`.
///
/// Errors with [`Error::BranchGuard`] (or [`Error::ZeroBase`]) when the base
/// leaves the right half-plane, rather than silently picking a branch.
pub fn power_pair(a: Complex64, e: BiExponent) -> Result<Complex64> {
    let log = guarded_log(a)?;
    Ok(cexp(e.hol * log + e.anti * log.conj()))
}

/// `a^{l|m}` for real `a > 0`, where it collapses to `a^(l+m)`.
pub fn real_power_pair(a: f64, e: BiExponent) -> Result<Complex64> {
    if !(a > 0.0) {
        return Err(if a == 0.0 {
            Error::ZeroBase
        } else {
            Error::BranchGuard {
                base: Complex64::new(a, 0.0),
            }
        });
    }
    Ok(real_pow(a, e.hol + e.anti))
}

/// `a^e` for real `a > 0` and complex `e` (no guard; callers check).
#[inline]
pub(crate) fn real_pow(a: f64, e: Complex64) -> Complex64 {
    let l = a.ln();
    let (s, c) = (e.im * l).sin_cos();
    let r = (e.re * l).exp();
    Complex64::new(r * c, r * s)
}

// --- log-gamma -------------------------------------------------------------

/// Lanczos approximation, g = 607/128, 15 coefficients. Relative accuracy
/// ~1e-15 on `Re z >= 1/2`.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_C: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_87e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_49e-3,
    -0.210_264_441_724_104_88e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_89e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_08e-4,
    0.368_991_826_595_316_3e-5,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// Core Lanczos evaluation, valid for `Re z >= 1/2`, `Im z >= 0`.
fn lanczos(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut a = Complex64::new(LANCZOS_C[0], 0.0);
    for (k, &c) in LANCZOS_C.iter().enumerate().skip(1) {
        a += c / (zm1 + k as f64);
    }
    let t = zm1 + (LANCZOS_G + 0.5);
    (zm1 + 0.5) * t.ln() - t + HALF_LN_2PI + a.ln()
}

/// `ln Gamma(z)`, the analytic continuation from the positive real axis.
///
/// Algorithm: Lanczos on `Re z >= 1/2`; otherwise the downward recurrence
/// `ln Gamma(z) = ln Gamma(z+k) - sum_{j<k} Log(z+j)` (an exact identity of
/// the continued branch on the closed upper half-plane), with conjugate
/// symmetry `ln Gamma(conj z) = conj ln Gamma(z)` covering `Im z < 0`.
///
/// Errors on the poles (non-positive integers). On the negative real axis the
/// branch is continuous from above (`Im z = +0.0`).
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    log_gamma_named(z, "log_gamma argument")
}

/// Same as [`log_gamma`] but pole errors carry the caller's name for the
/// argument (e.g. `"Gamma(lambda2 - n)"`).
pub fn log_gamma_named(z: Complex64, context: &'static str) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return Err(Error::GammaPole {
            argument: z,
            context,
        });
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::GammaPole {
            argument: z,
            context,
        });
    }
    if z.im.is_sign_negative() {
        return Ok(log_gamma_upper(z.conj()).conj());
    }
    Ok(log_gamma_upper(z))
}

/// `Im z >= 0`, not a pole.
fn log_gamma_upper(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        return lanczos(z);
    }
    let k = (0.5 - z.re).ceil() as usize;
    let mut shift = Complex64::ZERO;
    for j in 0..k {
        shift += (z + j as f64).ln();
    }
    lanczos(z + k as f64) - shift
}

/// `Gamma(z)` via `exp(log_gamma(z))`.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(cexp(log_gamma(z)?))
}

/// Euler beta `B(a, b) = Gamma(a) Gamma(b) / Gamma(a+b)`.
///
/// Preconditions: `a`, `b`, and `a+b` all off the gamma poles (a pole of the
/// denominator would make the value an honest zero, but every use in this
/// crate treats it as a parameter error).
pub fn beta_1d(a: Complex64, b: Complex64) -> Result<Complex64> {
    let la = log_gamma_named(a, "beta first argument")?;
    let lb = log_gamma_named(b, "beta second argument")?;
    let lab = log_gamma_named(a + b, "beta argument sum")?;
    Ok(cexp(la + lb - lab))
}

const LN_2: f64 = std::f64::consts::LN_2;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Closed form of the auxiliary 2D integral
///
/// ```text
///   integral over x > 0, y in R of  x^(alpha-1) * (1 + x + i y)^{-{beta|gamma}} dx dy
///     = 2^(2-beta-gamma) * pi * Gamma(alpha) * Gamma(beta+gamma-alpha-1)
///       / (Gamma(beta) * Gamma(gamma))
/// ```
///
/// Convergence requires `Re alpha > 0` and `Re(beta+gamma-alpha-1) > 0`; the
/// violated inequality is reported by name. Gamma poles of the denominator
/// arguments are reported as pole errors.
pub fn aux_closed_form(alpha: Complex64, beta: Complex64, gamma: Complex64) -> Result<Complex64> {
    if alpha.re <= 0.0 {
        return Err(Error::Convergence {
            inequality: "Re(alpha) > 0",
            margin: alpha.re,
        });
    }
    let s = beta + gamma - alpha - 1.0;
    if s.re <= 0.0 {
        return Err(Error::Convergence {
            inequality: "Re(beta + gamma - alpha - 1) > 0",
            margin: s.re,
        });
    }
    let ln = (2.0 - beta - gamma) * LN_2
        + LN_PI
        + log_gamma_named(alpha, "Gamma(alpha)")?
        + log_gamma_named(s, "Gamma(beta + gamma - alpha - 1)")?
        - log_gamma_named(beta, "Gamma(beta)")?
        - log_gamma_named(gamma, "Gamma(gamma)")?;
    Ok(cexp(ln))
}

/// Closed form of the inner Cauchy-type line integral
///
/// ```text
///   integral over w in R of  (a + i w)^{-{beta|gamma}} dw
///     = 2^(2-beta-gamma) * pi * a^(1-beta-gamma)
///       * Gamma(beta+gamma-1) / (Gamma(beta) * Gamma(gamma))
/// ```
///
/// for real `a > 0`, convergent when `Re(beta+gamma) > 1`.
pub fn cauchy_beta_inner(a: f64, beta: Complex64, gamma: Complex64) -> Result<Complex64> {
    if !(a > 0.0) {
        return Err(Error::Convergence {
            inequality: "a > 0",
            margin: a,
        });
    }
    let s = beta + gamma - 1.0;
    if s.re <= 0.0 {
        return Err(Error::Convergence {
            inequality: "Re(beta + gamma - 1) > 0",
            margin: s.re,
        });
    }
    let ln = (2.0 - beta - gamma) * LN_2
        + LN_PI
        + (1.0 - beta - gamma) * a.ln()
        + log_gamma_named(s, "Gamma(beta + gamma - 1)")?
        - log_gamma_named(beta, "Gamma(beta)")?
        - log_gamma_named(gamma, "Gamma(gamma)")?;
    Ok(cexp(ln))
}
