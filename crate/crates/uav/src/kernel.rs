use codp_core::dp::{DesignProblem, TraceOptions};
use codp_core::seed;
use codp_core::uncertainty::{MarkovKernel, Space, UncertaintyError};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::components::{actuation_stages, battery_unit_dp, compose_uav_with, uav_fun, uav_res};
use crate::params::{ActuatorSpec, BatteryTech, ComponentData, ParamRecord, Perception, TaskProfile};
use crate::{Result, UavError};

/// Half-width of the 90% interval, as a fraction of the mean.
pub const SPREAD: f64 = 0.05;
/// Two-sided 90% standard normal quantile.
pub const Z90: f64 = 1.6449;

/// Standard deviation giving a 90% interval of `mean * (1 ± SPREAD)`.
pub fn calibrated_sigma(mean: f64) -> f64 {
    SPREAD * mean / Z90
}

/// Independent Gaussian perturbation of `fields` of `base`, each with mean
/// the base value and [`calibrated_sigma`], truncated below at 0. With no
/// fields this is the delta kernel at `base`.
pub fn gaussian_param_kernel<T: ParamRecord>(base: &T, fields: &[String]) -> Result<MarkovKernel<(), T>> {
    let mut normals = Vec::new();
    for f in fields {
        let mean = base.get(f).ok_or_else(|| UavError::InvalidParameter(format!("unknown field {f}")))?;
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(UavError::InvalidParameter(format!("uncertain field {f} needs a positive base, got {mean}")));
        }
        let normal = Normal::new(mean, calibrated_sigma(mean)).map_err(|e| UavError::InvalidParameter(e.to_string()))?;
        normals.push((f.clone(), normal));
    }
    let name = std::any::type_name::<T>().rsplit("::").next().unwrap_or("record").to_string();
    let (domain, codomain) = (Space::Named("unit".into()), Space::Named(name));
    let base = base.clone();
    if normals.is_empty() {
        return Ok(MarkovKernel::deterministic(domain, codomain, move |_| Ok(base.clone())));
    }
    Ok(MarkovKernel::from_sampler(domain, codomain, move |_, s| {
        let mut rng = seed::rng(s);
        let mut out = base.clone();
        for (f, n) in &normals {
            out.set(f, n.sample(&mut rng).max(0.0));
        }
        Ok(out)
    }))
}

/// Which parameters are uncertain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub actuator_fields: Vec<String>,
    pub battery_fields: Vec<String>,
}

impl Default for Calibration {
    /// Energy density and both power coefficients; costs and masses stay
    /// deterministic.
    fn default() -> Self {
        Calibration {
            actuator_fields: vec!["p0".into(), "p1".into()],
            battery_fields: vec!["energy_density".into()],
        }
    }
}

impl Calibration {
    /// Zero variance: every kernel is a delta.
    pub fn none() -> Self {
        Calibration { actuator_fields: vec![], battery_fields: vec![] }
    }
}

/// Everything the case study is parameterized by.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UavModel {
    pub profile: TaskProfile,
    pub perception: Perception,
    pub data: ComponentData,
    pub calibration: Calibration,
    #[serde(skip)]
    pub trace: TraceOptions,
}

impl Default for UavModel {
    fn default() -> Self {
        UavModel {
            profile: TaskProfile::default(),
            perception: Perception::default(),
            data: ComponentData::builtin(),
            calibration: Calibration::default(),
            trace: TraceOptions::default(),
        }
    }
}

impl UavModel {
    pub fn deterministic() -> Self {
        UavModel { calibration: Calibration::none(), ..Self::default() }
    }

    /// The composite for `tech` at the tabulated parameters.
    pub fn compose(&self, tech: &str) -> Result<DesignProblem> {
        compose_uav_with(
            &self.profile,
            self.perception,
            battery_unit_dp(self.data.battery(tech)?)?,
            &actuation_stages(&self.data.actuators)?,
            self.trace,
        )
    }

    /// Samples every actuator independently, actuator `j` from
    /// `split(seed, j)`.
    pub fn actuator_kernel(&self) -> Result<MarkovKernel<(), Vec<ActuatorSpec>>> {
        let kernels = self
            .data
            .actuators
            .iter()
            .map(|a| gaussian_param_kernel(a, &self.calibration.actuator_fields))
            .collect::<Result<Vec<_>>>()?;
        Ok(MarkovKernel::from_sampler(Space::Named("unit".into()), Space::Named("actuators".into()), move |_, s| {
            kernels.iter().enumerate().map(|(j, k)| k.draw(&(), seed::split(s, j as u64))).collect()
        }))
    }

    /// Battery technology to its sampled parameter record.
    pub fn battery_tech_kernel(&self) -> Result<MarkovKernel<String, BatteryTech>> {
        let mut kernels = Vec::new();
        for b in &self.data.batteries {
            kernels.push((b.name.clone(), gaussian_param_kernel(b, &self.calibration.battery_fields)?));
        }
        let domain = Space::finite(self.data.tech_names());
        Ok(MarkovKernel::from_sampler(domain, Space::Named("BatteryTech".into()), move |t: &String, s| {
            let (_, k) = kernels.iter().find(|(n, _)| n == t).ok_or_else(|| UncertaintyError::OutOfDomain(t.clone()))?;
            k.draw(&(), s)
        }))
    }

    /// Battery technology to a sampled battery stage.
    pub fn battery_kernel(&self) -> Result<MarkovKernel<String, DesignProblem>> {
        let techs = self.battery_tech_kernel()?;
        let probe = battery_unit_dp(&self.data.batteries[0])?;
        let codomain = Space::dp(probe.fun_poset(), probe.res_poset());
        Ok(MarkovKernel::from_sampler(techs.domain().clone(), codomain, move |t: &String, s| {
            battery_unit_dp(&techs.draw(t, s)?).map_err(UavError::into_uncertainty)
        }))
    }
}

/// Battery technology to a sampled composite: actuators from `split(seed,
/// 0)`, battery from `split(seed, 1)`, task profile from `split(seed, 2)`.
/// The actuator choice happens after sampling, the battery choice before.
pub fn uav_kernel(
    model: &UavModel,
    profile: &MarkovKernel<(), TaskProfile>,
) -> Result<MarkovKernel<String, DesignProblem>> {
    let actuators = model.actuator_kernel()?;
    let battery = model.battery_kernel()?;
    let (perception, trace) = (model.perception, model.trace);
    let profile = profile.clone();
    Ok(MarkovKernel::from_sampler(battery.domain().clone(), Space::dp(&uav_fun(), &uav_res()), move |t, s| {
        let a = actuators.draw(&(), seed::split(s, 0))?;
        let b = battery.draw(t, seed::split(s, 1))?;
        let p = profile.draw(&(), seed::split(s, 2))?;
        let stages = actuation_stages(&a).map_err(UavError::into_uncertainty)?;
        compose_uav_with(&p, perception, b, &stages, trace).map_err(UavError::into_uncertainty)
    }))
}

/// The delta kernel at a fixed profile.
pub fn delta_profile(profile: &TaskProfile) -> MarkovKernel<(), TaskProfile> {
    let p = profile.clone();
    MarkovKernel::deterministic(Space::Named("unit".into()), Space::Named("TaskProfile".into()), move |_| Ok(p.clone()))
}
