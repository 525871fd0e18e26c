//! C ABI for the tubebeta verification library.
//!
//! Conventions of the surface:
//!
//! - every function returns a [`TbStatus`]; computed values go out through
//!   pointers, which the caller owns and which are written only on
//!   `TB_STATUS_OK` (documented exceptions aside);
//! - input pointers are read during the call and never retained;
//! - output pointers documented as optional may be null;
//! - panics never unwind across the boundary — they surface as
//!   `TB_STATUS_INTERNAL`;
//! - the only allocating entry point is [`tb_sampler_new`], paired with
//!   [`tb_sampler_free`].
//!
//! The generated header lives at `include/tubebeta.h` and is kept current by
//! the build script.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use tubebeta::closed_form::{factor_i, factor_j, rhs, VariantOffset};
use tubebeta::domain::{require_valid, validate_params, BetaParams};
use tubebeta::engine::{
    mc_lhs, quad_aux, quad_j_reduced, verify_step_with_mode, JacobianMode, ReductionStep,
    SamplerConfig,
};
use tubebeta::special::aux_closed_form;
use tubebeta::Error;

/// Result code of every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbStatus {
    /// Success; all non-optional outputs were written.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Parameters are malformed (n = 0, non-finite entries, unknown variant
    /// or step id) or violate the convergence conditions.
    InvalidParams = 2,
    /// A gamma-function argument hit a pole.
    GammaPole = 3,
    /// A power base crossed the principal-branch guard (Re <= 0) or was 0.
    BranchGuard = 4,
    /// A point left the tube domain.
    OutsideDomain = 5,
    /// An integral diverges for these parameters.
    Convergence = 6,
    /// Quadrature could not reach the requested tolerance.
    QuadTolerance = 7,
    /// Sampler or run configuration is unusable (budget < 2, workers = 0 or
    /// > 4096, bad proposal knobs).
    BadConfig = 8,
    /// An internal invariant failed (a panic was caught at the boundary).
    Internal = 9,
}

/// A complex number; layout-compatible with `double _Complex` and with
/// `struct { double re, im; }`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TbComplex {
    pub re: f64,
    pub im: f64,
}

impl From<TbComplex> for Complex64 {
    fn from(c: TbComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for TbComplex {
    fn from(c: Complex64) -> Self {
        TbComplex { re: c.re, im: c.im }
    }
}

/// The six exponents and the rank of the identity.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TbParams {
    /// Rank `n >= 1`; the domain lives in `C^(n+1)`.
    pub n: u32,
    pub lambda1: TbComplex,
    pub lambda2: TbComplex,
    pub sigma1: TbComplex,
    pub sigma2: TbComplex,
    pub tau1: TbComplex,
    pub tau2: TbComplex,
}

/// Monte-Carlo estimate of the integral side.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TbEstimate {
    /// Estimated value of the integral.
    pub mean: TbComplex,
    /// Standard error of the modulus of the estimate.
    pub std_error: f64,
    /// Samples actually accumulated.
    pub n_samples: u64,
    /// Samples discarded as non-finite (should be 0).
    pub nonfinite_samples: u64,
    /// max |sample| / mean |sample|; a tail-health diagnostic.
    pub weight_ratio: f64,
    /// True when `weight_ratio` exceeds the library's flagging threshold.
    pub flagged: bool,
}

/// Binary-power variant id: the closed form's second factor with exponent
/// offset `+n`.
pub const TB_VARIANT_PLUS_N: i32 = 1;
/// Binary-power variant id: the adjudicated exponent offset `0`.
pub const TB_VARIANT_ZERO: i32 = 0;
/// Binary-power variant id: exponent offset `-n`.
pub const TB_VARIANT_MINUS_N: i32 = -1;

/// Reduction stage id: the cone slice `v2 -> r` substitution.
pub const TB_STEP_R_SUBSTITUTION: i32 = 0;
/// Reduction stage id: the whitening change `(x, y) -> (p, q)`.
pub const TB_STEP_WHITENING: i32 = 1;
/// Reduction stage id: the imaginary shift `w2 -> h`.
pub const TB_STEP_H_SHIFT: i32 = 2;

/// Prepared Monte-Carlo run: validated parameters plus sampling
/// configuration. Opaque; create with [`tb_sampler_new`], destroy with
/// [`tb_sampler_free`].
pub struct TbSampler {
    params: BetaParams,
    cfg: SamplerConfig,
}

fn status_of(err: &Error) -> TbStatus {
    match err {
        Error::BranchGuard { .. } | Error::ZeroBase => TbStatus::BranchGuard,
        Error::GammaPole { .. } => TbStatus::GammaPole,
        Error::Convergence { .. } => TbStatus::Convergence,
        Error::OutsideDomain { .. } => TbStatus::OutsideDomain,
        Error::InvalidParams { .. } | Error::Parameter { .. } => TbStatus::InvalidParams,
        Error::QuadTolerance { .. } => TbStatus::QuadTolerance,
        Error::SamplerConfig { .. } | Error::Config { .. } => TbStatus::BadConfig,
    }
}

fn guarded<F: FnOnce() -> TbStatus>(f: F) -> TbStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(TbStatus::Internal)
}

/// Reads and structurally validates parameters (rank and finiteness only —
/// convergence is each entry point's concern).
unsafe fn params_of(p: *const TbParams) -> Result<BetaParams, TbStatus> {
    let p = p.as_ref().ok_or(TbStatus::NullArgument)?;
    BetaParams::new(
        p.n,
        p.lambda1.into(),
        p.lambda2.into(),
        p.sigma1.into(),
        p.sigma2.into(),
        p.tau1.into(),
        p.tau2.into(),
    )
    .map_err(|e| status_of(&e))
}

fn variant_of(id: i32) -> Result<VariantOffset, TbStatus> {
    match id {
        TB_VARIANT_PLUS_N => Ok(VariantOffset::PlusN),
        TB_VARIANT_ZERO => Ok(VariantOffset::Zero),
        TB_VARIANT_MINUS_N => Ok(VariantOffset::MinusN),
        _ => Err(TbStatus::InvalidParams),
    }
}

fn step_of(id: i32) -> Result<ReductionStep, TbStatus> {
    match id {
        TB_STEP_R_SUBSTITUTION => Ok(ReductionStep::RSubstitution),
        TB_STEP_WHITENING => Ok(ReductionStep::Whitening),
        TB_STEP_H_SHIFT => Ok(ReductionStep::HShift),
        _ => Err(TbStatus::InvalidParams),
    }
}

/// Writes `value` through `out` unless `out` is null.
unsafe fn write_opt<T>(out: *mut T, value: T) {
    if let Some(slot) = out.as_mut() {
        *slot = value;
    }
}

/// Static, NUL-terminated name of a status code. Never null.
#[no_mangle]
pub extern "C" fn tb_status_name(status: TbStatus) -> *const c_char {
    let name: &'static [u8] = match status {
        TbStatus::Ok => b"ok\0",
        TbStatus::NullArgument => b"null argument\0",
        TbStatus::InvalidParams => b"invalid parameters\0",
        TbStatus::GammaPole => b"gamma pole\0",
        TbStatus::BranchGuard => b"branch guard\0",
        TbStatus::OutsideDomain => b"outside domain\0",
        TbStatus::Convergence => b"integral diverges\0",
        TbStatus::QuadTolerance => b"quadrature tolerance not reached\0",
        TbStatus::BadConfig => b"bad configuration\0",
        TbStatus::Internal => b"internal error\0",
    };
    name.as_ptr().cast()
}

/// Checks the four convergence conditions of the identity.
///
/// Returns `TB_STATUS_OK` when all four hold strictly, otherwise
/// `TB_STATUS_INVALID_PARAMS`. When `out_margins` is non-null it receives
/// the four signed margins (positive = holds) in the order: Re(lambda1)
/// bound, first-block budget, Re(lambda2) bound, second-block budget —
/// written in both outcomes.
///
/// # Safety
/// `params` must be null or point to a readable `TbParams`; `out_margins`
/// must be null or point to writable space for 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn tb_validate(
    params: *const TbParams,
    out_margins: *mut f64,
) -> TbStatus {
    guarded(|| {
        let p = match params_of(params) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let report = validate_params(&p);
        if !out_margins.is_null() {
            let margins = std::slice::from_raw_parts_mut(out_margins, 4);
            for (slot, cond) in margins.iter_mut().zip(report.conditions.iter()) {
                *slot = cond.margin;
            }
        }
        if report.all_hold() {
            TbStatus::Ok
        } else {
            TbStatus::InvalidParams
        }
    })
}

/// Closed form of the auxiliary 2D integral.
///
/// # Safety
/// `out` must be null (the call then only reports the status) or point to a
/// writable `TbComplex`.
#[no_mangle]
pub unsafe extern "C" fn tb_aux_closed_form(
    alpha: TbComplex,
    beta: TbComplex,
    gamma: TbComplex,
    out: *mut TbComplex,
) -> TbStatus {
    guarded(|| match aux_closed_form(alpha.into(), beta.into(), gamma.into()) {
        Ok(v) => {
            write_opt(out, v.into());
            TbStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// First gamma factor of the closed form.
///
/// # Safety
/// `params` must be null or readable; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn tb_factor_i(params: *const TbParams, out: *mut TbComplex) -> TbStatus {
    guarded(|| {
        let p = match params_of(params) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match factor_i(&p) {
            Ok(v) => {
                write_opt(out, v.into());
                TbStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Second gamma factor of the closed form at a binary-power variant
/// (`TB_VARIANT_*`).
///
/// # Safety
/// `params` must be null or readable; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn tb_factor_j(
    params: *const TbParams,
    variant: i32,
    out: *mut TbComplex,
) -> TbStatus {
    guarded(|| {
        let (p, v) = match (params_of(params), variant_of(variant)) {
            (Ok(p), Ok(v)) => (p, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match factor_j(&p, v) {
            Ok(value) => {
                write_opt(out, value.into());
                TbStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Full closed form (product of both factors) at a binary-power variant.
/// Fails with `TB_STATUS_INVALID_PARAMS` when the convergence conditions do
/// not hold.
///
/// # Safety
/// `params` must be null or readable; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn tb_rhs(
    params: *const TbParams,
    variant: i32,
    out: *mut TbComplex,
) -> TbStatus {
    guarded(|| {
        let (p, v) = match (params_of(params), variant_of(variant)) {
            (Ok(p), Ok(v)) => (p, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match rhs(&p, v) {
            Ok(value) => {
                write_opt(out, value.into());
                TbStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Deterministic quadrature of the auxiliary 2D integral to relative
/// tolerance `tol`. `out_error_estimate` and `out_evaluations` are optional.
///
/// # Safety
/// `out_value` must be null or writable, likewise both optional outputs.
#[no_mangle]
pub unsafe extern "C" fn tb_quad_aux(
    alpha: TbComplex,
    beta: TbComplex,
    gamma: TbComplex,
    tol: f64,
    out_value: *mut TbComplex,
    out_error_estimate: *mut f64,
    out_evaluations: *mut u64,
) -> TbStatus {
    guarded(
        || match quad_aux(alpha.into(), beta.into(), gamma.into(), tol) {
            Ok(q) => {
                write_opt(out_value, q.value.into());
                write_opt(out_error_estimate, q.error_estimate);
                write_opt(out_evaluations, q.evaluations);
                TbStatus::Ok
            }
            Err(e) => status_of(&e),
        },
    )
}

/// Deterministic quadrature of the reduced second-factor integral to
/// relative tolerance `tol`. `out_error_estimate` and `out_evaluations` are
/// optional.
///
/// # Safety
/// `params` must be null or readable; outputs must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn tb_quad_j_reduced(
    params: *const TbParams,
    tol: f64,
    out_value: *mut TbComplex,
    out_error_estimate: *mut f64,
    out_evaluations: *mut u64,
) -> TbStatus {
    guarded(|| {
        let p = match params_of(params) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match quad_j_reduced(&p, tol) {
            Ok(q) => {
                write_opt(out_value, q.value.into());
                write_opt(out_error_estimate, q.error_estimate);
                write_opt(out_evaluations, q.evaluations);
                TbStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Checks one reduction stage (`TB_STEP_*`) pointwise on `samples` draws.
/// `unit_jacobian_fault` replaces the whitening volume factor by 1 — a
/// negative control that must make the whitening stage fail for `n >= 2`.
/// Writes whether the stage held through `out_pass` (required) and the
/// worst relative error through optional `out_max_rel_err`.
///
/// # Safety
/// `params` must be null or readable; `out_pass` must be writable;
/// `out_max_rel_err` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn tb_verify_step(
    params: *const TbParams,
    step: i32,
    samples: u64,
    seed: u64,
    unit_jacobian_fault: bool,
    out_max_rel_err: *mut f64,
    out_pass: *mut bool,
) -> TbStatus {
    guarded(|| {
        if out_pass.is_null() {
            return TbStatus::NullArgument;
        }
        let (p, s) = match (params_of(params), step_of(step)) {
            (Ok(p), Ok(s)) => (p, s),
            (Err(st), _) | (_, Err(st)) => return st,
        };
        let mode = if unit_jacobian_fault {
            JacobianMode::UnitFault
        } else {
            JacobianMode::Analytic
        };
        match verify_step_with_mode(s, &p, samples, seed, mode) {
            Ok(check) => {
                write_opt(out_pass, check.pass);
                write_opt(out_max_rel_err, check.max_rel_err);
                TbStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Creates a Monte-Carlo run handle for the integral side. Validates the
/// convergence conditions eagerly. `workers = 0` selects the library
/// default (8); otherwise `1..=4096`. The handle must be released with
/// [`tb_sampler_free`].
///
/// # Safety
/// `params` must be null or readable; `out` must point to a writable
/// pointer slot. On success `*out` owns the handle.
#[no_mangle]
pub unsafe extern "C" fn tb_sampler_new(
    params: *const TbParams,
    budget: u64,
    seed: u64,
    workers: u32,
    out: *mut *mut TbSampler,
) -> TbStatus {
    guarded(|| {
        if out.is_null() {
            return TbStatus::NullArgument;
        }
        let p = match params_of(params) {
            Ok(p) => p,
            Err(s) => return s,
        };
        if let Err(e) = require_valid(&p) {
            return status_of(&e);
        }
        if budget < 2 || workers > 4096 {
            return TbStatus::BadConfig;
        }
        let mut cfg = SamplerConfig::new(budget, seed);
        if workers != 0 {
            cfg = cfg.with_workers(workers);
        }
        *out = Box::into_raw(Box::new(TbSampler { params: p, cfg }));
        TbStatus::Ok
    })
}

/// Runs the Monte-Carlo estimate configured in `sampler`. The handle stays
/// valid and can be run again (the estimate is deterministic per
/// (seed, budget, workers), so reruns reproduce the same numbers).
///
/// # Safety
/// `sampler` must be a live handle from [`tb_sampler_new`] (or null);
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn tb_sampler_run(
    sampler: *const TbSampler,
    out: *mut TbEstimate,
) -> TbStatus {
    guarded(|| {
        let s = match sampler.as_ref() {
            Some(s) => s,
            None => return TbStatus::NullArgument,
        };
        match mc_lhs(&s.params, &s.cfg) {
            Ok(est) => {
                write_opt(
                    out,
                    TbEstimate {
                        mean: est.mean.into(),
                        std_error: est.std_error,
                        n_samples: est.n_samples,
                        nonfinite_samples: est.nonfinite_samples,
                        weight_ratio: est.weight_ratio,
                        flagged: est.flagged,
                    },
                );
                TbStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a handle from [`tb_sampler_new`]. Null is a no-op.
///
/// # Safety
/// `sampler` must be null or a handle not freed before; the handle must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tb_sampler_free(sampler: *mut TbSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}
