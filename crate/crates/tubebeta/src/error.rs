//! Crate-wide error type.
//!
//! Every fallible operation returns [`Error`]; numerical misuse is reported by
//! naming the violated inequality or the offending argument instead of letting
//! a silently wrong number propagate.

use num_complex::Complex64;

use crate::domain::ValidityReport;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// The bi-power `a^{l|m}` is only defined on the principal-branch guard
    /// region `Re a > 0`; every base arising inside the domain satisfies it.
    #[error("bi-power base {base} lies outside the guard region Re > 0")]
    BranchGuard { base: Complex64 },

    #[error("bi-power base is zero")]
    ZeroBase,

    /// A gamma-function argument landed on a pole. `context` names the
    /// argument as it appears in the formula being evaluated.
    #[error("{context} = {argument} is a pole of the gamma function")]
    GammaPole {
        argument: Complex64,
        context: &'static str,
    },

    /// A convergence condition of an integral closed form was violated.
    /// `margin` is the amount by which the (strict) inequality fails or holds:
    /// the left side minus the right side.
    #[error("convergence condition violated: {inequality} (margin {margin:e})")]
    Convergence {
        inequality: &'static str,
        margin: f64,
    },

    /// A point fed to an integrand or reduction lies outside the tube domain.
    #[error("point outside the tube domain: v1 = {v1:e}, v1*v2 - |x|^2 = {cone_slack:e}")]
    OutsideDomain { v1: f64, cone_slack: f64 },

    /// Parameters fail one or more of the four convergence conditions.
    #[error("parameters outside the convergence region:\n{report}")]
    InvalidParams { report: ValidityReport },

    /// A structurally invalid parameter (non-finite value, `n = 0`,
    /// mismatched coordinate lengths), as opposed to a convergence failure.
    #[error("invalid parameter: {message}")]
    Parameter { message: String },

    /// A proposal-shape knob violates one of the domination/variance
    /// inequalities, or a config field is structurally invalid.
    #[error("invalid sampler configuration: {message}")]
    SamplerConfig { message: String },

    /// Adaptive quadrature hit its refinement cap before reaching tolerance.
    #[error(
        "quadrature did not reach tolerance {tol:e}: error estimate {error_estimate:e} \
         after {evaluations} evaluations"
    )]
    QuadTolerance {
        tol: f64,
        error_estimate: f64,
        evaluations: u64,
    },

    /// A run-configuration file could not be parsed. Distinct from
    /// [`Error::Parameter`] so callers can separate "the config file is
    /// malformed" from "the parameters are mathematically unusable".
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
