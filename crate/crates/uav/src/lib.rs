//! Task-driven UAV design: task management, perception, actuation and
//! battery components, the battery-mass feedback loop, Gaussian parameter
//! kernels and the Monte Carlo cost study.
//!
//! Units: grams, newtons, seconds, watts, watt-hours, dollars.

pub mod components;
pub mod kernel;
pub mod params;
pub mod registry;
pub mod study;

use codp_core::uncertainty::UncertaintyError;
use codp_core::DpError;

pub use components::{
    actuation_dp, actuation_stages, actuation_union, airframe_dp, battery_dp, battery_unit_dp, compose_uav, compose_uav_with, energy_dp,
    mass_loop_body, perception_dp, task_management_dp,
};
pub use kernel::{calibrated_sigma, delta_profile, gaussian_param_kernel, uav_kernel, Calibration, UavModel};
pub use params::{ActuatorSpec, BatteryTech, ComponentData, ParamRecord, Perception, TaskProfile, G};
pub use registry::registry;
pub use study::{
    default_grid, min_cost, write_front_csv, write_records_csv, write_summaries_csv, CostDistribution, FrontPoint,
    Outcome, Study, Summary, Sweep, UAVQueryRecord,
};

#[derive(Debug, thiserror::Error)]
pub enum UavError {
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown battery technology {0}")]
    UnknownTech(String),
    #[error("component data: {0}")]
    Data(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl UavError {
    /// For use inside kernel samplers.
    pub fn into_uncertainty(self) -> UncertaintyError {
        match self {
            UavError::Dp(e) => UncertaintyError::Dp(e),
            UavError::Uncertainty(e) => e,
            other => UncertaintyError::InvalidDistribution(other.to_string()),
        }
    }
}

pub type Result<T, E = UavError> = std::result::Result<T, E>;
