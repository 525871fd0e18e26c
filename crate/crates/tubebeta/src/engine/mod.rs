//! Numerical evaluation engines for the left-hand side: importance-sampled
//! Monte-Carlo ([`mc`]), deterministic tanh-sinh quadrature ([`quad`]), and
//! the sample-wise reduction-stage checks ([`steps`]), on top of the
//! counter-based RNG ([`rng`]) and the factorized proposal ([`sampler`]).

pub mod mc;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod steps;

pub use mc::{mc_lhs, IntegrationEstimate, SamplerConfig, WEIGHT_RATIO_FLAG};
pub use quad::{quad_aux, quad_j_reduced, QuadResult};
pub use rng::SampleRng;
pub use sampler::{PreparedProposal, ProposalShape};
pub use steps::{
    verify_step, verify_step_with_mode, JacobianMode, ReductionStep, StepCheck,
    STEP_TOLERANCE,
};
