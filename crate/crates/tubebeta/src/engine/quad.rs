//! Deterministic tanh-sinh (double-exponential) quadrature.
//!
//! A single driver integrates a complex-valued function against one of three
//! variable transforms:
//!
//! * `(0, 1)`      — `x = sigmoid(pi * sinh t)`, evaluated as the stable pair
//!   `(x, 1 - x)` so endpoint factors never cancel;
//! * `(0, inf)`    — `x = exp(pi * sinh t)` (the algebraically simplified
//!   composition of the unit map with `x/(1-x)`);
//! * `(-inf, inf)` — `y = scale * tan(pi * (x - 1/2))` on top of the unit
//!   map, with the weight assembled so `tan^2` never overflows.
//!
//! Each refinement level halves the step and adds the odd nodes, so previous
//! work is reused. Convergence is declared when successive level estimates
//! agree to the requested tolerance; the error estimate of nested inner
//! integrals is propagated outward through an "inherited error" accumulator
//! that is summed with the same weights as the integrand itself.

use num_complex::Complex64;
use std::cell::Cell;
use std::f64::consts::PI;

use crate::domain::BetaParams;
use crate::error::{Error, Result};
use crate::special::{power_pair, real_pow, BiExponent};

/// Result of one adaptive quadrature run.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    /// Convergence gap of the final refinement plus all inherited inner error.
    pub error_estimate: f64,
    /// Total integrand evaluations, inner dimensions included.
    pub evaluations: u64,
}

const STEP0: f64 = 0.5;
const T_MAX: f64 = 6.4;
const MAX_LEVEL: u32 = 10;

/// What to do when the level budget is exhausted before the tolerance is met.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CapPolicy {
    /// Outermost integral: failing the tolerance is an error.
    Strict,
    /// Inner integrals: return the best estimate and let the inherited-error
    /// accumulator carry the shortfall outward.
    Lenient,
}

#[derive(Debug, Clone, Copy)]
struct Tolerance {
    abs: f64,
    rel: f64,
}

impl Tolerance {
    fn of(rel: f64) -> Self {
        // A small absolute floor keeps near-zero integrals from spinning on
        // an unreachable relative target.
        Tolerance {
            abs: rel * 1e-4,
            rel,
        }
    }

    fn met(&self, gap: f64, scale: f64) -> bool {
        gap <= self.abs.max(self.rel * scale)
    }
}

/// Shared driver. `node` maps an abscissa `t` to `Some((y, weight))` or
/// `None` when the transform has underflowed past usefulness, and `f`
/// returns the integrand value together with any inherited inner error.
fn tanh_sinh<Y>(
    node: impl Fn(f64) -> Option<(Y, f64)>,
    mut f: impl FnMut(Y) -> Result<(Complex64, f64)>,
    tol: Tolerance,
    policy: CapPolicy,
    evals: &Cell<u64>,
) -> Result<(Complex64, f64)> {
    let mut add = |t: f64| -> Result<(Complex64, f64)> {
        let Some((y, w)) = node(t) else {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        };
        if w == 0.0 || !w.is_finite() {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        evals.set(evals.get() + 1);
        let (v, e) = f(y)?;
        let term = w * v;
        if !term.re.is_finite() || !term.im.is_finite() {
            // Underflow/overflow at the far tail of the transform; the
            // convergence test decides whether the result is trustworthy.
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        Ok((term, w.abs() * e))
    };

    let kmax0 = (T_MAX / STEP0).floor() as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut inherited_raw = 0.0;
    for k in -kmax0..=kmax0 {
        let (v, e) = add(k as f64 * STEP0)?;
        sum += v;
        inherited_raw += e;
    }
    let mut h = STEP0;
    let mut value = sum * h;
    let mut inherited = inherited_raw * h;
    let mut gap = f64::INFINITY;

    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let kmax = (T_MAX / h).floor() as i64;
        let mut odd_sum = Complex64::new(0.0, 0.0);
        let mut odd_err = 0.0;
        let mut k = -kmax;
        if k % 2 == 0 {
            k += 1;
        }
        while k <= kmax {
            let (v, e) = add(k as f64 * h)?;
            odd_sum += v;
            odd_err += e;
            k += 2;
        }
        let next = value * 0.5 + odd_sum * h;
        inherited = inherited * 0.5 + odd_err * h;
        gap = (next - value).norm();
        value = next;
        if level >= 2 && tol.met(gap, value.norm()) {
            return Ok((value, gap + inherited));
        }
    }

    match policy {
        CapPolicy::Lenient => Ok((value, gap + inherited)),
        CapPolicy::Strict => Err(Error::QuadTolerance {
            tol: tol.abs.max(tol.rel * value.norm()),
            error_estimate: gap + inherited,
            evaluations: evals.get(),
        }),
    }
}

/// Unit-interval transform; yields the pair `(x, 1 - x)`.
fn map_unit(t: f64) -> Option<((f64, f64), f64)> {
    let u = PI * t.sinh();
    let (x, omx) = if u < 0.0 {
        let e = u.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    } else {
        let e = (-u).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    };
    let w = PI * t.cosh() * x * omx;
    if w == 0.0 || !w.is_finite() || x == 0.0 || omx == 0.0 {
        None
    } else {
        Some(((x, omx), w))
    }
}

/// Half-line transform `x = exp(pi sinh t)`.
fn map_half_line(t: f64) -> Option<(f64, f64)> {
    let x = (PI * t.sinh()).exp();
    if x == 0.0 || !x.is_finite() {
        return None;
    }
    let w = PI * t.cosh() * x;
    if !w.is_finite() {
        return None;
    }
    Some((x, w))
}

/// Whole-line transform `y = scale * tan(pi (x - 1/2))`, weight assembled to
/// avoid squaring the tangent before it is tamed by `x (1-x)`.
fn map_line(scale: f64, t: f64) -> Option<(f64, f64)> {
    let ((x, omx), _) = map_unit(t)?;
    let (s, c) = (PI * x).sin_cos();
    let tt = -c / s;
    if !tt.is_finite() {
        return None;
    }
    let m = x * omx * tt;
    let bracket = x * omx + m * tt;
    if !bracket.is_finite() {
        return None;
    }
    let w = PI * t.cosh() * PI * bracket * scale;
    if !w.is_finite() || w == 0.0 {
        return None;
    }
    Some((scale * tt, w))
}

fn check_positive(re: f64, inequality: &'static str) -> Result<()> {
    if re > 0.0 {
        Ok(())
    } else {
        Err(Error::Convergence {
            inequality,
            margin: re,
        })
    }
}

/// Quadrature evaluation of the auxiliary two-variable integral
///
/// ```text
///   integral over x in (0,inf), y in R of
///       x^(alpha-1) * ((1+x)(1+iy))^(-beta) * conj-power(..., -gamma)  dy dx
/// ```
///
/// with base `1 + x + i y`. The inner line transform is scaled by `1 + x`,
/// the natural width of the integrand in `y`. Converges iff `Re(alpha) > 0`
/// and `Re(beta + gamma - alpha - 1) > 0`, exactly like its closed form.
pub fn quad_aux(
    alpha: Complex64,
    beta: Complex64,
    gamma: Complex64,
    tol: f64,
) -> Result<QuadResult> {
    check_positive(alpha.re, "Re(alpha) > 0")?;
    check_positive(
        (beta + gamma - alpha).re - 1.0,
        "Re(beta + gamma - alpha - 1) > 0",
    )?;
    let neg = BiExponent::new(-beta, -gamma);
    let exp_outer = alpha - 1.0;
    let evals = Cell::new(0u64);
    let inner_tol = Tolerance::of(tol * 1e-2);
    let (value, error_estimate) = tanh_sinh(
        map_half_line,
        |x| {
            let scale = 1.0 + x;
            let (inner, inner_err) = tanh_sinh(
                |t| map_line(scale, t),
                |y| Ok((power_pair(Complex64::new(scale, y), neg)?, 0.0)),
                inner_tol,
                CapPolicy::Lenient,
                &evals,
            )?;
            let face = real_pow(x, exp_outer);
            Ok((face * inner, face.norm() * inner_err))
        },
        Tolerance::of(tol * 0.5),
        CapPolicy::Strict,
        &evals,
    )?;
    Ok(QuadResult {
        value,
        error_estimate,
        evaluations: evals.get(),
    })
}

/// Quadrature evaluation of the reduced second-block integral
///
/// ```text
///   integral over r in (0,inf), (p,q) in R^(2n-2), h in R of
///       r^(lambda2-n-1) * (1 + r + |p|^2 + |q|^2 + i h)^(-sigma2 | -tau2)
/// ```
///
/// after collapsing the spherical `(p,q)` shell to a radial coordinate:
/// for n = 1 the shell is empty and the integral IS the auxiliary integral
/// with `alpha = lambda2 - 1`; for n >= 2 the shell of dimension `2n-2`
/// contributes `pi^(n-1)/(n-2)!` times a radial factor `rho^(n-2)` with
/// `rho = |p|^2 + |q|^2`.
pub fn quad_j_reduced(params: &BetaParams, tol: f64) -> Result<QuadResult> {
    let n = params.n;
    check_positive(params.lambda2.re - n as f64, "Re(lambda2) > n")?;
    check_positive(
        (params.sigma2 + params.tau2 - params.lambda2).re,
        "Re(sigma2 + tau2 - lambda2) > 0",
    )?;
    if n == 1 {
        return quad_aux(
            params.lambda2 - 1.0,
            params.sigma2,
            params.tau2,
            tol,
        );
    }

    let neg = BiExponent::new(-params.sigma2, -params.tau2);
    let exp_r = params.lambda2 - (n as f64 + 1.0);
    let rho_pow = n as i32 - 2;
    // pi^(n-1) / (n-2)!
    let mut prefactor = PI.powi(n as i32 - 1);
    for k in 2..n {
        prefactor /= (k - 1) as f64;
    }

    let evals = Cell::new(0u64);
    let tol_h = Tolerance::of(tol * 1e-3);
    let tol_rho = Tolerance::of(tol * 0.02);
    let (value, error_estimate) = tanh_sinh(
        map_half_line,
        |r| {
            let (mid, mid_err) = tanh_sinh(
                map_half_line,
                |rho| {
                    let scale = 1.0 + r + rho;
                    let (inner, inner_err) = tanh_sinh(
                        |t| map_line(scale, t),
                        |h| Ok((power_pair(Complex64::new(scale, h), neg)?, 0.0)),
                        tol_h,
                        CapPolicy::Lenient,
                        &evals,
                    )?;
                    let face = rho.powi(rho_pow);
                    Ok((face * inner, face.abs() * inner_err))
                },
                tol_rho,
                CapPolicy::Lenient,
                &evals,
            )?;
            let face = real_pow(r, exp_r);
            Ok((face * mid, face.norm() * mid_err))
        },
        Tolerance::of(tol * 0.5),
        CapPolicy::Strict,
        &evals,
    )?;
    Ok(QuadResult {
        value: value * prefactor,
        error_estimate: error_estimate * prefactor,
        evaluations: evals.get(),
    })
}
