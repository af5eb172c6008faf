use codp_core::uncertainty::{MarkovKernel, ParameterizedDP, Space, UncertaintyError};
use codp_dsl::{Entry, ParamValue, Registry};

use crate::components::{actuation_dp, actuation_union, airframe_dp, battery_unit_dp, perception_dp, task_management_dp};
use crate::kernel::UavModel;
use crate::{Result, UavError};

fn label(v: &ParamValue) -> std::result::Result<String, UncertaintyError> {
    v.as_label().map(str::to_string).ok_or_else(|| UncertaintyError::OutOfDomain(v.to_string()))
}

/// Entries for `.codp` diagrams of the case study:
///
/// - `uav.task`, `uav.perception`, `uav.airframe`: fixed components
/// - `uav.<actuator>` and `uav.battery.<tech>`: tabulated components
/// - `uav.actuation`: kernel on `{all}`, sampled actuators under free choice
/// - `uav.battery`: kernel on technologies, sampled battery stage
/// - `uav.battery_fn`: the same family at tabulated values
pub fn registry(model: &UavModel) -> Result<Registry> {
    let mut r = Registry::new();
    r.fixed("uav.task", task_management_dp(model.profile.frequency)?);
    r.fixed("uav.perception", perception_dp(model.perception)?);
    r.fixed("uav.airframe", airframe_dp());
    for a in &model.data.actuators {
        r.fixed(format!("uav.{}", a.name), actuation_dp(a)?.tagged(a.name.clone()));
    }
    for b in &model.data.batteries {
        r.fixed(format!("uav.battery.{}", b.name), battery_unit_dp(b)?);
    }

    let actuators = model.actuator_kernel()?;
    let probe = actuation_union(&model.data.actuators)?;
    let codomain = Space::dp(probe.fun_poset(), probe.res_poset());
    r.insert(
        "uav.actuation",
        Entry::Kernel(MarkovKernel::from_sampler(Space::finite(["all"]), codomain, move |v: &ParamValue, s| {
            if v.as_label() != Some("all") {
                return Err(UncertaintyError::OutOfDomain(v.to_string()));
            }
            actuation_union(&actuators.draw(&(), s)?).map_err(UavError::into_uncertainty)
        })),
    );

    let battery = model.battery_kernel()?;
    r.insert(
        "uav.battery",
        Entry::Kernel(MarkovKernel::from_sampler(
            battery.domain().clone(),
            battery.codomain().clone(),
            move |v: &ParamValue, s| battery.draw(&label(v)?, s),
        )),
    );

    let probe = battery_unit_dp(&model.data.batteries[0])?;
    let data = model.data.clone();
    r.insert(
        "uav.battery_fn",
        Entry::Function(ParameterizedDP::new(
            Space::finite(model.data.tech_names()),
            probe.fun_poset().clone(),
            probe.res_poset().clone(),
            move |v: &ParamValue| {
                let t = data.battery(&label(v)?).map_err(UavError::into_uncertainty)?;
                battery_unit_dp(t).map_err(UavError::into_uncertainty)
            },
        )),
    );
    Ok(r)
}
