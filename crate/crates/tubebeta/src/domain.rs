//! The tube domain over the light cone, the six-parameter integrand living on
//! it, and the chain of measure-preserving reductions to separated
//! coordinates.
//!
//! Coordinates on `C^{n+1}`: `(u1, u2, z_1, .., z_{n-1})` with `u_k = v_k + i w_k`
//! and `z_j = x_j + i y_j`. Membership in the domain is
//!
//! ```text
//!   v1 > 0   and   v1*v2 - sum_j x_j^2 > 0        (both strict)
//! ```
//!
//! The reduction chain replaces `(v2, x, y, w2)` by `(r, p, q, h)`:
//!
//! ```text
//!   r   = v2 - sum_j x_j^2 / v1                    (cone slice; Jacobian 1)
//!   (p_j, q_j) = (x_j, y_j) * S^(1/2)              (whitening)
//!   h   = w2 - Im( sum_j z_j^2 / (1+u1) )          (imaginary shift; Jacobian 1)
//! ```
//!
//! where `S = S(u1)` is the 2x2 symmetric positive-definite matrix with
//!
//! ```text
//!   S11 = 1/v1 - (1+v1)/D,  S12 = -w1/D,  S22 = (1+v1)/D,  D = (1+v1)^2 + w1^2,
//!   det S = 1 / (v1 * D).
//! ```
//!
//! `S` is exactly the quadratic form that turns the real part of the horn
//! factor `H = 1 + u2 - sum z_j^2/(1+u1)` into a sum of squares:
//!
//! ```text
//!   Re H = 1 + r + sum_j (p_j^2 + q_j^2)  > 1     on the domain.
//! ```
//!
//! The inverse whitening `(x_j, y_j) = (p_j, q_j) * S^(-1/2)` carries the
//! volume factor `dx dy = (v1 * D)^((n-1)/2) dp dq`, which is
//! [`jacobian_reduction`]. On the reduced coordinates the integrand separates
//! into a `(v1, w1)` block and an `(r, p, q, h)` block
//! ([`integrand_separated`]), each an instance of the auxiliary 2D integral.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::{cexp, guarded_log, BiExponent};

// --- parameters -------------------------------------------------------------

/// The six complex exponents of the identity plus the rank parameter `n >= 1`
/// (the number of `z` coordinates is `n - 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub n: u32,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub sigma1: Complex64,
    pub sigma2: Complex64,
    pub tau1: Complex64,
    pub tau2: Complex64,
}

impl BetaParams {
    /// Parameter order matches the identity: `(lambda1, lambda2, sigma1,
    /// sigma2, tau1, tau2)`.
    pub fn new(
        n: u32,
        lambda1: Complex64,
        lambda2: Complex64,
        sigma1: Complex64,
        sigma2: Complex64,
        tau1: Complex64,
        tau2: Complex64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter {
                message: "n must be >= 1".into(),
            });
        }
        let all = [lambda1, lambda2, sigma1, sigma2, tau1, tau2];
        if all.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Parameter {
                message: "parameters must be finite".into(),
            });
        }
        Ok(Self {
            n,
            lambda1,
            lambda2,
            sigma1,
            sigma2,
            tau1,
            tau2,
        })
    }

    /// All six exponents real.
    pub fn real(n: u32, l1: f64, l2: f64, s1: f64, s2: f64, t1: f64, t2: f64) -> Result<Self> {
        let c = |x: f64| Complex64::new(x, 0.0);
        Self::new(n, c(l1), c(l2), c(s1), c(s2), c(t1), c(t2))
    }
}

/// One of the four convergence conditions, with the amount by which the strict
/// inequality holds (`margin > 0`) or fails (`margin <= 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub inequality: &'static str,
    pub margin: f64,
    pub holds: bool,
}

/// Outcome of [`validate_params`]: the four convergence conditions of the
/// identity, checked strictly.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub conditions: [ConditionCheck; 4],
}

impl ValidityReport {
    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.conditions.iter().filter(|c| !c.holds)
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.conditions {
            writeln!(
                f,
                "  [{}] {:<40} margin {:+.6e}",
                if c.holds { "PASS" } else { "FAIL" },
                c.inequality,
                c.margin
            )?;
        }
        Ok(())
    }
}

/// Checks the four conditions under which both sides of the identity converge:
///
/// ```text
///   Re(lambda1) > (n+1)/2
///   Re(sigma1 + tau1 - lambda1) > (n-1)/2
///   Re(lambda2) > n
///   Re(sigma2 + tau2 - lambda2) > 0
/// ```
pub fn validate_params(p: &BetaParams) -> ValidityReport {
    let n = p.n as f64;
    let m1 = p.lambda1.re - 0.5 * (n + 1.0);
    let m2 = (p.sigma1 + p.tau1 - p.lambda1).re - 0.5 * (n - 1.0);
    let m3 = p.lambda2.re - n;
    let m4 = (p.sigma2 + p.tau2 - p.lambda2).re;
    let mk = |inequality, margin: f64| ConditionCheck {
        inequality,
        margin,
        holds: margin > 0.0,
    };
    ValidityReport {
        conditions: [
            mk("Re(lambda1) > (n+1)/2", m1),
            mk("Re(sigma1 + tau1 - lambda1) > (n-1)/2", m2),
            mk("Re(lambda2) > n", m3),
            mk("Re(sigma2 + tau2 - lambda2) > 0", m4),
        ],
    }
}

/// [`validate_params`] as a `Result`, for call sites that require validity.
pub fn require_valid(p: &BetaParams) -> Result<()> {
    let report = validate_params(p);
    if report.all_hold() {
        Ok(())
    } else {
        Err(Error::InvalidParams { report })
    }
}

// --- points -----------------------------------------------------------------

/// A point of `C^{n+1}` in the original coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TubePoint {
    pub u1: Complex64,
    pub u2: Complex64,
    /// The `n - 1` cone-direction coordinates `z_j = x_j + i y_j`.
    pub z: Vec<Complex64>,
}

impl TubePoint {
    pub fn new(u1: Complex64, u2: Complex64, z: Vec<Complex64>) -> Self {
        Self { u1, u2, z }
    }

    /// Rank parameter `n` (one more than the number of `z` coordinates).
    pub fn n(&self) -> u32 {
        self.z.len() as u32 + 1
    }

    /// Zero-initialized point with the right shape for rank `n`.
    pub fn zeros(n: u32) -> Self {
        Self::new(
            Complex64::ZERO,
            Complex64::ZERO,
            vec![Complex64::ZERO; (n - 1) as usize],
        )
    }

    /// The reference point `u1 = u2 = 1, z = 0`.
    pub fn base_point(n: u32) -> Self {
        Self::new(
            Complex64::ONE,
            Complex64::ONE,
            vec![Complex64::ZERO; (n - 1) as usize],
        )
    }

    /// `v1*v2 - sum x_j^2`, the defining cone form evaluated on real parts.
    pub fn cone_slack(&self) -> f64 {
        let mut s = self.u1.re * self.u2.re;
        for z in &self.z {
            s -= z.re * z.re;
        }
        s
    }
}

/// A point in the separated coordinates `(v1, w1, r, h, p, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPoint {
    pub v1: f64,
    pub w1: f64,
    pub r: f64,
    pub h: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl ReducedPoint {
    pub fn new(v1: f64, w1: f64, r: f64, h: f64, p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::Parameter {
                message: format!("p and q must have equal length ({} vs {})", p.len(), q.len()),
            });
        }
        Ok(Self { v1, w1, r, h, p, q })
    }

    pub fn n(&self) -> u32 {
        self.p.len() as u32 + 1
    }

    pub fn zeros(n: u32) -> Self {
        Self {
            v1: 0.0,
            w1: 0.0,
            r: 0.0,
            h: 0.0,
            p: vec![0.0; (n - 1) as usize],
            q: vec![0.0; (n - 1) as usize],
        }
    }

    /// `sum_j (p_j^2 + q_j^2)`.
    pub fn pq_norm_sqr(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.p.len() {
            s += self.p[j] * self.p[j] + self.q[j] * self.q[j];
        }
        s
    }
}

/// Strict membership test for the tube domain.
pub fn contains(pt: &TubePoint) -> bool {
    pt.u1.re > 0.0 && pt.cone_slack() > 0.0
}

/// Density of the invariant measure relative to Lebesgue measure:
/// `(v1*v2 - sum x_j^2)^(-(n+1))`.
pub fn invariant_measure_density(pt: &TubePoint) -> Result<f64> {
    let slack = pt.cone_slack();
    if !(pt.u1.re > 0.0) || !(slack > 0.0) {
        return Err(Error::OutsideDomain {
            v1: pt.u1.re,
            cone_slack: slack,
        });
    }
    Ok(slack.powi(-(pt.n() as i32) - 1))
}

// --- the whitening matrix ----------------------------------------------------

/// The symmetric positive-definite 2x2 matrix `S(u1)` (see module docs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMatrix {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

impl SMatrix {
    pub fn det(&self) -> f64 {
        self.s11 * self.s22 - self.s12 * self.s12
    }

    pub fn trace(&self) -> f64 {
        self.s11 + self.s22
    }

    /// The unique SPD square root, in closed form: with `s = sqrt(det S)` and
    /// `t = sqrt(trace S + 2 s)`, `S^(1/2) = (S + s*I) / t`.
    pub fn sqrt(&self) -> SMatrix {
        let s = self.det().sqrt();
        let t = (self.trace() + 2.0 * s).sqrt();
        SMatrix {
            s11: (self.s11 + s) / t,
            s12: self.s12 / t,
            s22: (self.s22 + s) / t,
        }
    }

    /// The inverse SPD square root; `det S^(1/2) = sqrt(det S) = s`, so
    /// `S^(-1/2) = adj(S^(1/2)) / s = [[s22+s, -s12], [-s12, s11+s]] / (s*t)`.
    pub fn inv_sqrt(&self) -> SMatrix {
        let s = self.det().sqrt();
        let t = (self.trace() + 2.0 * s).sqrt();
        let st = s * t;
        SMatrix {
            s11: (self.s22 + s) / st,
            s12: -self.s12 / st,
            s22: (self.s11 + s) / st,
        }
    }

    /// Row-vector action `(a, b) * S` (equals `S * (a, b)^T` by symmetry).
    #[inline]
    pub fn apply(&self, a: f64, b: f64) -> (f64, f64) {
        (
            a * self.s11 + b * self.s12,
            a * self.s12 + b * self.s22,
        )
    }

    /// The quadratic form `(a, b) S (a, b)^T`.
    pub fn quad_form(&self, a: f64, b: f64) -> f64 {
        a * a * self.s11 + 2.0 * a * b * self.s12 + b * b * self.s22
    }
}

/// The whitening matrix of the horn factor's real part at `u1 = v1 + i w1`.
pub fn s_matrix(v1: f64, w1: f64) -> Result<SMatrix> {
    if !(v1 > 0.0) {
        return Err(Error::OutsideDomain {
            v1,
            cone_slack: f64::NAN,
        });
    }
    let d = (1.0 + v1) * (1.0 + v1) + w1 * w1;
    // s11 = 1/v1 - (1+v1)/D in the source form; the common-denominator
    // numerator D - v1(1+v1) collapses to 1 + v1 + w1^2, which avoids the
    // catastrophic cancellation of the two-term form at large v1.
    Ok(SMatrix {
        s11: (1.0 + v1 + w1 * w1) / (v1 * d),
        s12: -w1 / d,
        s22: (1.0 + v1) / d,
    })
}

/// `|det d(x, y, v2, w2) / d(p, q, r, h)| = (v1 * ((1+v1)^2 + w1^2))^((n-1)/2)`,
/// the volume factor of [`reduce_inverse`] (the forward [`reduce`] carries its
/// reciprocal). Identically 1 at `n = 1`.
pub fn jacobian_reduction(v1: f64, w1: f64, n: u32) -> Result<f64> {
    if !(v1 > 0.0) {
        return Err(Error::OutsideDomain {
            v1,
            cone_slack: f64::NAN,
        });
    }
    let d = (1.0 + v1) * (1.0 + v1) + w1 * w1;
    Ok((v1 * d).powf((n - 1) as f64 / 2.0))
}

/// `ln` of [`jacobian_reduction`], for weight assembly in the sampling loop.
#[inline]
pub(crate) fn ln_jacobian_reduction(v1: f64, w1: f64, n: u32) -> f64 {
    if n == 1 {
        return 0.0;
    }
    let d = (1.0 + v1) * (1.0 + v1) + w1 * w1;
    ((n - 1) as f64 / 2.0) * (v1.ln() + d.ln())
}

// --- the reduction chain ------------------------------------------------------

/// Forward reduction `(u1, u2, z) -> (v1, w1, r, h, p, q)`.
pub fn reduce(pt: &TubePoint) -> Result<ReducedPoint> {
    let mut rp = ReducedPoint::zeros(pt.n());
    reduce_into(pt, &mut rp)?;
    Ok(rp)
}

pub(crate) fn reduce_into(pt: &TubePoint, rp: &mut ReducedPoint) -> Result<()> {
    let slack = pt.cone_slack();
    let v1 = pt.u1.re;
    if !(v1 > 0.0) || !(slack > 0.0) {
        return Err(Error::OutsideDomain {
            v1,
            cone_slack: slack,
        });
    }
    let w1 = pt.u1.im;
    rp.v1 = v1;
    rp.w1 = w1;
    let half = s_matrix(v1, w1)?.sqrt();

    let mut xsq = 0.0;
    let mut z2_sum = Complex64::ZERO;
    for (j, z) in pt.z.iter().enumerate() {
        let (p, q) = half.apply(z.re, z.im);
        rp.p[j] = p;
        rp.q[j] = q;
        xsq += z.re * z.re;
        z2_sum += z * z;
    }
    rp.r = pt.u2.re - xsq / v1;
    rp.h = pt.u2.im - (z2_sum / (1.0 + pt.u1)).im;
    Ok(())
}

/// Inverse reduction `(v1, w1, r, h, p, q) -> (u1, u2, z)`. Defined for
/// `v1 > 0`, `r > 0`; the image is always inside the domain.
pub fn reduce_inverse(rp: &ReducedPoint) -> Result<TubePoint> {
    let mut pt = TubePoint::zeros(rp.n());
    reduce_inverse_into(rp, &mut pt)?;
    Ok(pt)
}

pub(crate) fn reduce_inverse_into(rp: &ReducedPoint, pt: &mut TubePoint) -> Result<()> {
    if !(rp.v1 > 0.0) || !(rp.r > 0.0) {
        return Err(Error::OutsideDomain {
            v1: rp.v1,
            cone_slack: rp.r,
        });
    }
    let u1 = Complex64::new(rp.v1, rp.w1);
    pt.u1 = u1;
    let inv_half = s_matrix(rp.v1, rp.w1)?.inv_sqrt();

    let mut xsq = 0.0;
    let mut z2_sum = Complex64::ZERO;
    for j in 0..rp.p.len() {
        let (x, y) = inv_half.apply(rp.p[j], rp.q[j]);
        let z = Complex64::new(x, y);
        pt.z[j] = z;
        xsq += x * x;
        z2_sum += z * z;
    }
    let v2 = rp.r + xsq / rp.v1;
    let w2 = rp.h + (z2_sum / (1.0 + u1)).im;
    pt.u2 = Complex64::new(v2, w2);
    Ok(())
}

// --- integrands ----------------------------------------------------------------

/// The left-hand integrand of the identity in its original form, with derived
/// exponents precomputed. The kernel `(1+u1)(1+u2) - sum z_j^2` can leave the
/// right half-plane inside the domain, so its power is taken through the
/// factorization `(1+u1) * H` with `H = 1 + u2 - sum z_j^2/(1+u1)`: both
/// factors have positive real part on the domain, their arguments lie in
/// `(-pi/2, pi/2)`, and the continued branch of the product power equals the
/// product of the principal factor powers.
#[derive(Debug, Clone)]
pub struct LhsIntegrand {
    /// `lambda1 - lambda2` (exponent of `v1`).
    e_v1: Complex64,
    /// `lambda2 - n - 1` (exponent of the cone form).
    e_cone: Complex64,
    /// `{sigma1 - sigma2 | tau1 - tau2}` (outer `1 + u1` power).
    e_u1: BiExponent,
    /// `{sigma2 | tau2}` (kernel power).
    e_kernel: BiExponent,
}

impl LhsIntegrand {
    pub fn new(p: &BetaParams) -> Self {
        Self {
            e_v1: p.lambda1 - p.lambda2,
            e_cone: p.lambda2 - (p.n as f64 + 1.0),
            e_u1: BiExponent::new(p.sigma1 - p.sigma2, p.tau1 - p.tau2),
            e_kernel: BiExponent::new(p.sigma2, p.tau2),
        }
    }

    /// `ln` of the integrand value (single `exp` left to the caller; the
    /// sampling loop folds the weight into the exponent first).
    pub fn eval_log(&self, pt: &TubePoint) -> Result<Complex64> {
        let v1 = pt.u1.re;
        let slack = pt.cone_slack();
        if !(v1 > 0.0) || !(slack > 0.0) {
            return Err(Error::OutsideDomain {
                v1,
                cone_slack: slack,
            });
        }
        let base1 = 1.0 + pt.u1;
        let mut z2_sum = Complex64::ZERO;
        for z in &pt.z {
            z2_sum += z * z;
        }
        // Horn factor; Re H > 1 on the domain (up to rounding at the boundary).
        let horn = 1.0 + pt.u2 - z2_sum / base1;
        let l1 = guarded_log(base1)?;
        let lh = guarded_log(horn)?;
        let lk = l1 + lh; // continued log of the kernel (1+u1)(1+u2) - sum z^2
        Ok(self.e_v1 * v1.ln() + self.e_cone * slack.ln()
            - (self.e_u1.hol * l1 + self.e_u1.anti * l1.conj())
            - (self.e_kernel.hol * lk + self.e_kernel.anti * lk.conj()))
    }

    pub fn eval(&self, pt: &TubePoint) -> Result<Complex64> {
        Ok(cexp(self.eval_log(pt)?))
    }
}

/// Left-hand integrand of the identity at a point of the domain.
pub fn integrand_lhs(pt: &TubePoint, params: &BetaParams) -> Result<Complex64> {
    LhsIntegrand::new(params).eval(pt)
}

/// The fully reduced, separated integrand
///
/// ```text
///   g(v1, w1, r, h, p, q) =
///       v1^(lambda1 - n/2 - 3/2) * (1 + v1 + i w1)^{-{sigma1-(n-1)/2 | tau1-(n-1)/2}}
///     * r^(lambda2 - n - 1)      * (1 + r + sum(p^2+q^2) + i h)^{-{sigma2 | tau2}}
/// ```
///
/// which is `integrand_lhs(reduce_inverse(rp)) * jacobian_reduction(v1, w1, n)`
/// pointwise.
#[derive(Debug, Clone)]
pub struct SeparatedIntegrand {
    /// `lambda1 - (n+3)/2` (exponent of `v1`).
    e_v1: Complex64,
    /// `{sigma1 - (n-1)/2 | tau1 - (n-1)/2}`.
    e_u1: BiExponent,
    /// `lambda2 - n - 1` (exponent of `r`).
    e_r: Complex64,
    /// `{sigma2 | tau2}`.
    e_horn: BiExponent,
}

impl SeparatedIntegrand {
    pub fn new(p: &BetaParams) -> Self {
        let half_nm1 = (p.n as f64 - 1.0) / 2.0;
        Self {
            e_v1: p.lambda1 - (p.n as f64 + 3.0) / 2.0,
            e_u1: BiExponent::new(p.sigma1 - half_nm1, p.tau1 - half_nm1),
            e_r: p.lambda2 - (p.n as f64 + 1.0),
            e_horn: BiExponent::new(p.sigma2, p.tau2),
        }
    }

    pub fn eval_log(&self, rp: &ReducedPoint) -> Result<Complex64> {
        if !(rp.v1 > 0.0) || !(rp.r > 0.0) {
            return Err(Error::OutsideDomain {
                v1: rp.v1,
                cone_slack: rp.r,
            });
        }
        let base1 = Complex64::new(1.0 + rp.v1, rp.w1);
        let horn = Complex64::new(1.0 + rp.r + rp.pq_norm_sqr(), rp.h);
        let l1 = guarded_log(base1)?;
        let lh = guarded_log(horn)?;
        Ok(self.e_v1 * rp.v1.ln() + self.e_r * rp.r.ln()
            - (self.e_u1.hol * l1 + self.e_u1.anti * l1.conj())
            - (self.e_horn.hol * lh + self.e_horn.anti * lh.conj()))
    }

    pub fn eval(&self, rp: &ReducedPoint) -> Result<Complex64> {
        Ok(cexp(self.eval_log(rp)?))
    }
}

/// Separated integrand at a reduced point.
pub fn integrand_separated(rp: &ReducedPoint, params: &BetaParams) -> Result<Complex64> {
    SeparatedIntegrand::new(params).eval(rp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rng::SampleRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Deterministic well-conditioned reduced point for rank `n`.
    fn sample_reduced(rng: &mut SampleRng, n: u32) -> ReducedPoint {
        let mut rp = ReducedPoint::zeros(n);
        rp.v1 = 0.05 + 3.0 * rng.uniform();
        rp.w1 = 4.0 * rng.uniform() - 2.0;
        rp.r = 0.05 + 3.0 * rng.uniform();
        rp.h = 4.0 * rng.uniform() - 2.0;
        for j in 0..(n - 1) as usize {
            rp.p[j] = 3.0 * rng.uniform() - 1.5;
            rp.q[j] = 3.0 * rng.uniform() - 1.5;
        }
        rp
    }

    #[test]
    fn membership_is_strict() {
        let inside = TubePoint::new(c(1.0, 5.0), c(2.0, -3.0), vec![c(1.0, 0.7)]);
        assert!(contains(&inside)); // 1*2 - 1 = 1 > 0
        let boundary = TubePoint::new(c(1.0, 0.0), c(1.0, 0.0), vec![c(1.0, 0.0)]);
        assert!(!contains(&boundary)); // slack exactly 0
        let outside = TubePoint::new(c(-1.0, 0.0), c(-2.0, 0.0), vec![]);
        assert!(!contains(&outside)); // v1 < 0 (slack 2 > 0 alone is not enough)
        let nan = TubePoint::new(c(f64::NAN, 0.0), c(1.0, 0.0), vec![]);
        assert!(!contains(&nan));
    }

    #[test]
    fn invariant_density_examples() {
        let base = TubePoint::base_point(3);
        assert_eq!(invariant_measure_density(&base).unwrap(), 1.0);
        let pt = TubePoint::new(c(1.0, 0.0), c(2.0, 0.0), vec![]);
        assert_eq!(invariant_measure_density(&pt).unwrap(), 0.25);
        let out = TubePoint::new(c(1.0, 0.0), c(-1.0, 0.0), vec![]);
        assert!(matches!(
            invariant_measure_density(&out),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn validity_report_examples() {
        let p = BetaParams::real(1, 2.0, 2.0, 3.0, 3.0, 2.0, 2.0).unwrap();
        let rep = validate_params(&p);
        assert!(rep.all_hold());
        let margins: Vec<f64> = rep.conditions.iter().map(|c| c.margin).collect();
        assert_eq!(margins, vec![1.0, 3.0, 1.0, 3.0]);

        let zero = BetaParams::real(1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let rep = validate_params(&zero);
        assert!(!rep.all_hold());
        // Strict inequalities: all four fail (two at margin 0, two at -1).
        assert_eq!(rep.failures().count(), 4);
        assert!(rep.conditions[0].inequality.contains("lambda1"));
    }

    #[test]
    fn s_matrix_closed_forms() {
        let s = s_matrix(1.0, 0.0).unwrap();
        assert_eq!((s.s11, s.s12, s.s22), (0.5, 0.0, 0.5));
        assert!((s.det() - 0.25).abs() < 1e-15);

        let s = s_matrix(3.0, 4.0).unwrap();
        assert!((s.s11 - 5.0 / 24.0).abs() < 1e-15);
        assert!((s.s12 + 1.0 / 8.0).abs() < 1e-15);
        assert!((s.s22 - 1.0 / 8.0).abs() < 1e-15);
        assert!((s.det() - 1.0 / 96.0).abs() < 1e-16);
        assert!(s_matrix(0.0, 1.0).is_err());
    }

    #[test]
    fn s_matrix_det_identity_and_spd_on_grid() {
        // det S = 1/(v1 * D), and SPD, across a wide grid.
        for i in 0..40 {
            for j in 0..40 {
                let v1 = 1e-3 * 1.5f64.powi(i); // up to ~1e4
                let w1 = if j % 2 == 0 { 1.0 } else { -1.0 } * 1e-3 * 1.4f64.powi(j);
                let d = (1.0 + v1) * (1.0 + v1) + w1 * w1;
                let s = s_matrix(v1, w1).unwrap();
                let det = s.det();
                let expect = 1.0 / (v1 * d);
                assert!(
                    (det - expect).abs() <= 1e-12 * expect,
                    "det mismatch at v1={v1}, w1={w1}: {det} vs {expect}"
                );
                assert!(s.s11 > 0.0 && det > 0.0, "SPD violated at v1={v1}, w1={w1}");
            }
        }
    }

    #[test]
    fn s_matrix_sqrt_roundtrips() {
        let mut rng = SampleRng::new(21, 0);
        for _ in 0..500 {
            let v1 = 1e-2 + 20.0 * rng.uniform();
            let w1 = 30.0 * rng.uniform() - 15.0;
            let s = s_matrix(v1, w1).unwrap();
            let h = s.sqrt();
            // h * h = s
            let (a, b) = (
                h.s11 * h.s11 + h.s12 * h.s12,
                h.s11 * h.s12 + h.s12 * h.s22,
            );
            let cc = h.s12 * h.s12 + h.s22 * h.s22;
            let scale = s.s11.abs().max(s.s22.abs());
            assert!((a - s.s11).abs() <= 1e-12 * scale);
            assert!((b - s.s12).abs() <= 1e-12 * scale);
            assert!((cc - s.s22).abs() <= 1e-12 * scale);
            // h * inv = identity
            let inv = s.inv_sqrt();
            let id11 = h.s11 * inv.s11 + h.s12 * inv.s12;
            let id12 = h.s11 * inv.s12 + h.s12 * inv.s22;
            let id22 = h.s12 * inv.s12 + h.s22 * inv.s22;
            assert!((id11 - 1.0).abs() <= 1e-11);
            assert!(id12.abs() <= 1e-11);
            assert!((id22 - 1.0).abs() <= 1e-11);
        }
    }

    #[test]
    fn reduction_roundtrips() {
        let mut rng = SampleRng::new(22, 0);
        for n in 1..=3u32 {
            for _ in 0..400 {
                let rp = sample_reduced(&mut rng, n);
                let pt = reduce_inverse(&rp).unwrap();
                assert!(contains(&pt), "image of reduce_inverse must lie inside");
                let back = reduce(&pt).unwrap();
                assert!((back.v1 - rp.v1).abs() <= 1e-10 * (1.0 + rp.v1.abs()));
                assert!((back.w1 - rp.w1).abs() <= 1e-10 * (1.0 + rp.w1.abs()));
                assert!((back.r - rp.r).abs() <= 1e-10 * (1.0 + rp.r.abs()));
                assert!((back.h - rp.h).abs() <= 1e-10 * (1.0 + rp.h.abs()));
                for j in 0..(n - 1) as usize {
                    assert!((back.p[j] - rp.p[j]).abs() <= 1e-10 * (1.0 + rp.p[j].abs()));
                    assert!((back.q[j] - rp.q[j]).abs() <= 1e-10 * (1.0 + rp.q[j].abs()));
                }
                // And the other direction.
                let pt2 = reduce_inverse(&back).unwrap();
                assert!((pt2.u2 - pt.u2).norm() <= 1e-10 * (1.0 + pt.u2.norm()));
            }
        }
    }

    #[test]
    fn horn_real_part_matches_whitened_squares() {
        // Re(1 + u2 - sum z^2/(1+u1)) == 1 + r + sum(p^2 + q^2) > 1.
        let mut rng = SampleRng::new(23, 0);
        for n in 2..=3u32 {
            for _ in 0..400 {
                let rp = sample_reduced(&mut rng, n);
                let pt = reduce_inverse(&rp).unwrap();
                let mut z2 = Complex64::ZERO;
                for z in &pt.z {
                    z2 += z * z;
                }
                let horn = 1.0 + pt.u2 - z2 / (1.0 + pt.u1);
                let expect = 1.0 + rp.r + rp.pq_norm_sqr();
                assert!(expect > 1.0);
                assert!(
                    (horn.re - expect).abs() <= 1e-10 * expect,
                    "Re H = {} vs whitened {}",
                    horn.re,
                    expect
                );
            }
        }
    }

    #[test]
    fn jacobian_closed_form_examples() {
        assert_eq!(jacobian_reduction(0.7, -3.0, 1).unwrap(), 1.0);
        assert_eq!(jacobian_reduction(1.0, 0.0, 3).unwrap(), 4.0);
        let v = jacobian_reduction(2.0, 1.0, 2).unwrap();
        assert!((v - (2.0 * 10.0f64).sqrt()).abs() < 1e-14);
    }

    /// Finite-difference determinant oracle for the full change of variables.
    #[test]
    fn jacobian_matches_finite_difference_determinant() {
        fn pack(rp: &ReducedPoint) -> Vec<f64> {
            let mut v = vec![rp.v1, rp.w1, rp.r, rp.h];
            v.extend_from_slice(&rp.p);
            v.extend_from_slice(&rp.q);
            v
        }
        fn unpack(v: &[f64], n: u32) -> ReducedPoint {
            let m = (n - 1) as usize;
            ReducedPoint::new(
                v[0],
                v[1],
                v[2],
                v[3],
                v[4..4 + m].to_vec(),
                v[4 + m..4 + 2 * m].to_vec(),
            )
            .unwrap()
        }
        fn flatten(pt: &TubePoint) -> Vec<f64> {
            let mut v = vec![pt.u1.re, pt.u1.im, pt.u2.re, pt.u2.im];
            v.extend(pt.z.iter().map(|z| z.re));
            v.extend(pt.z.iter().map(|z| z.im));
            v
        }
        fn det(mut m: Vec<Vec<f64>>) -> f64 {
            let k = m.len();
            let mut d = 1.0;
            for col in 0..k {
                let piv = (col..k)
                    .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
                    .unwrap();
                if piv != col {
                    m.swap(piv, col);
                    d = -d;
                }
                d *= m[col][col];
                for row in col + 1..k {
                    let f = m[row][col] / m[col][col];
                    for cc in col..k {
                        m[row][cc] -= f * m[col][cc];
                    }
                }
            }
            d
        }

        let mut rng = SampleRng::new(24, 0);
        for n in 1..=3u32 {
            for _ in 0..25 {
                let rp = sample_reduced(&mut rng, n);
                let x0 = pack(&rp);
                let dim = x0.len();
                let mut jac = vec![vec![0.0; dim]; dim];
                for i in 0..dim {
                    let step = 1e-6 * (1.0 + x0[i].abs());
                    let mut hi = x0.clone();
                    hi[i] += step;
                    let mut lo = x0.clone();
                    lo[i] -= step;
                    let fh = flatten(&reduce_inverse(&unpack(&hi, n)).unwrap());
                    let fl = flatten(&reduce_inverse(&unpack(&lo, n)).unwrap());
                    for (row, grad) in jac.iter_mut().enumerate() {
                        grad[i] = (fh[row] - fl[row]) / (2.0 * step);
                    }
                }
                let fd = det(jac).abs();
                let analytic = jacobian_reduction(rp.v1, rp.w1, n).unwrap();
                assert!(
                    (fd - analytic).abs() <= 5e-6 * analytic,
                    "n={n}: finite-difference det {fd} vs closed form {analytic}"
                );
            }
        }
    }

    #[test]
    fn lhs_integrand_examples() {
        // All derived exponents zero -> integrand identically 1.
        let p = BetaParams::real(1, 2.0, 2.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let v = integrand_lhs(&TubePoint::base_point(1), &p).unwrap();
        assert!((v - Complex64::ONE).norm() < 1e-15);

        // (2,2,3,3,2,2) at the base point: 1 / ((2*2)^(3+2)) = 2^-10.
        let p = BetaParams::real(1, 2.0, 2.0, 3.0, 3.0, 2.0, 2.0).unwrap();
        let v = integrand_lhs(&TubePoint::base_point(1), &p).unwrap();
        assert!((v - c(2.0f64.powi(-10), 0.0)).norm() < 1e-15);

        let outside = TubePoint::new(c(-1.0, 0.0), c(1.0, 0.0), vec![]);
        assert!(matches!(
            integrand_lhs(&outside, &p),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn separated_integrand_matches_base_case() {
        let p = BetaParams::real(1, 2.0, 2.0, 3.0, 3.0, 2.0, 2.0).unwrap();
        let rp = ReducedPoint::new(1.0, 0.0, 1.0, 0.0, vec![], vec![]).unwrap();
        let v = integrand_separated(&rp, &p).unwrap();
        assert!((v - c(2.0f64.powi(-10), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pushforward_identity_pointwise() {
        // integrand_lhs(reduce_inverse(rp)) * jacobian == integrand_separated(rp),
        // including complex parameters; and dropping the Jacobian breaks it by
        // exactly (v1 * D)^((n-1)/2) for n >= 2.
        let mut rng = SampleRng::new(25, 0);
        for n in 1..=3u32 {
            let p = BetaParams::new(
                n,
                c(2.0 + n as f64, 0.3),
                c(1.5 + n as f64, -0.2),
                c(3.0 + n as f64, 0.5),
                c(2.5 + n as f64, -0.4),
                c(3.0 + n as f64, -0.5),
                c(2.5 + n as f64, 0.4),
            )
            .unwrap();
            for _ in 0..200 {
                let rp = sample_reduced(&mut rng, n);
                let pt = reduce_inverse(&rp).unwrap();
                let lhs = integrand_lhs(&pt, &p).unwrap()
                    * jacobian_reduction(rp.v1, rp.w1, n).unwrap();
                let rhs = integrand_separated(&rp, &p).unwrap();
                let scale = lhs.norm().max(rhs.norm());
                assert!(
                    (lhs - rhs).norm() <= 1e-11 * scale,
                    "pushforward mismatch at n={n}: {lhs} vs {rhs}"
                );
                if n >= 2 {
                    let bare = integrand_lhs(&pt, &p).unwrap();
                    let ratio = (rhs / bare).norm();
                    let d = (1.0 + rp.v1) * (1.0 + rp.v1) + rp.w1 * rp.w1;
                    let expect = (rp.v1 * d).powf((n - 1) as f64 / 2.0);
                    assert!(
                        (ratio - expect).abs() <= 1e-9 * expect,
                        "unit-jacobian control should differ by {expect}, got {ratio}"
                    );
                }
            }
        }
    }
}
