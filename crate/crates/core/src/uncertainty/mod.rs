//! Uncertainty over design problems: intervals, distributions represented by
//! seeded samplers, parameterized families, and Markov kernels.

mod estimate;
mod interval;
mod kernel;
mod param;
mod sampler;

pub use estimate::{feasible_or_diverged, sampler_success_probability, success_probability, wilson_interval, Estimate};
pub use interval::{embed_dp, interval_lift, interval_trace, IntervalDP};
pub use kernel::{
    kernel_compose, kernel_lift, kernel_product, merge_pmf, reparam_kernel, MarkovKernel, Pmf, Space,
};
pub use param::{param_lift, param_trace, param_trace_with, reparam, ParameterizedDP};
pub use sampler::{delta_sampler, dist_lift_binary, dist_lift_trace, dist_lift_trace_with, pushforward, DPSampler};

use thiserror::Error;

use crate::dp::DpError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UncertaintyError {
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error("space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: String, found: String },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("parameter {0} is outside the domain")]
    OutOfDomain(String),
    #[error("sample count must be at least 1")]
    NoSamples,
}

impl From<crate::poset::PosetError> for UncertaintyError {
    fn from(e: crate::poset::PosetError) -> Self {
        UncertaintyError::Dp(e.into())
    }
}

pub type Result<T, E = UncertaintyError> = std::result::Result<T, E>;
