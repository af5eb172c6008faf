//! Component design problems and the composite with its mass loop.
//!
//! Port order follows port names, matching the `.codp` transcription: every
//! product below lists its coordinates alphabetically by port.

use codp_core::dp::{self, DesignProblem, TraceOptions};
use codp_core::{Element, Poset};

use crate::params::{ActuatorSpec, BatteryTech, Perception, TaskProfile, G};
use crate::{Result, UavError};

pub fn grams() -> Poset {
    Poset::nonneg_real("g")
}

pub fn newtons() -> Poset {
    Poset::nonneg_real("N")
}

pub fn seconds() -> Poset {
    Poset::nonneg_real("s")
}

pub fn count() -> Poset {
    Poset::nonneg_real("count")
}

pub fn meters() -> Poset {
    Poset::nonneg_real("m")
}

pub fn mps() -> Poset {
    Poset::nonneg_real("m/s")
}

pub fn watts() -> Poset {
    Poset::nonneg_real("W")
}

pub fn dollars() -> Poset {
    Poset::nonneg_real("USD")
}

pub fn watt_hours() -> Poset {
    Poset::nonneg_real("Wh")
}

/// Payload in, `(self_weight, total_cost)` out.
pub fn uav_fun() -> Poset {
    grams()
}

pub fn uav_res() -> Poset {
    Poset::pair(grams(), dollars())
}

fn x(e: &Element) -> f64 {
    e.as_real().expect("real coordinate")
}

fn xs(e: &Element) -> Vec<f64> {
    e.components().expect("tuple").iter().map(x).collect()
}

fn reals(v: &[f64]) -> Element {
    Element::tuple(v.iter().map(|&a| Element::real(a)))
}

/// `a * b` with `0 * inf = 0`.
fn mul0(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

fn check_param(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(UavError::InvalidParameter(format!("{what} = {v}")))
    }
}

/// `(distance m, missions) -> (endurance s, missions, velocity m/s)` with
/// velocity = distance * frequency and endurance = distance / velocity.
/// A positive distance with zero frequency is infeasible.
pub fn task_management_dp(frequency: f64) -> Result<DesignProblem> {
    check_param("frequency", frequency)?;
    let fun = Poset::pair(meters(), count());
    let res = Poset::product([seconds(), count(), mps()]);
    Ok(DesignProblem::from_fn(fun, res, move |f| {
        let [d, m] = xs(f)[..] else { unreachable!() };
        if d == 0.0 {
            return vec![reals(&[0.0, m, 0.0])];
        }
        if frequency == 0.0 {
            return vec![];
        }
        let v = d * frequency;
        vec![reals(&[d / v, m, v])]
    })
    .named("task"))
}

/// Velocity to perception power.
pub fn perception_dp(p: Perception) -> Result<DesignProblem> {
    check_param("c0", p.c0)?;
    check_param("c1", p.c1)?;
    Ok(DesignProblem::from_monotone_map(mps(), watts(), move |v| Element::real(p.c0 + mul0(p.c1, x(v))))
        .named("perception"))
}

/// `(lift N, velocity m/s) -> (cost, mass g, power W)`; infeasible above
/// the actuator's maximum velocity.
pub fn actuation_dp(a: &ActuatorSpec) -> Result<DesignProblem> {
    for (k, v) in [("mass", a.mass), ("cost", a.cost), ("max_velocity", a.max_velocity), ("p0", a.p0), ("p1", a.p1)] {
        check_param(&format!("{}.{k}", a.name), v)?;
    }
    let a = a.clone();
    let fun = Poset::pair(newtons(), mps());
    let res = Poset::product([dollars(), grams(), watts()]);
    let name = a.name.clone();
    Ok(DesignProblem::from_fn(fun, res, move |f| {
        let [lift, v] = xs(f)[..] else { unreachable!() };
        if v > a.max_velocity {
            return vec![];
        }
        vec![reals(&[a.cost, a.mass, a.p0 + mul0(a.p1, lift * lift)])]
    })
    .named(name))
}

/// Actuation stages tagged with the actuator name, one per actuator.
pub fn actuation_stages(actuators: &[ActuatorSpec]) -> Result<Vec<DesignProblem>> {
    actuators.iter().map(|a| Ok(actuation_dp(a)?.tagged(a.name.clone()))).collect()
}

/// Free choice among actuators; witnesses carry the actuator name.
pub fn actuation_union(actuators: &[ActuatorSpec]) -> Result<DesignProblem> {
    dp::union_all(&actuation_stages(actuators)?)?.ok_or_else(|| UavError::InvalidParameter("empty actuator list".into()))
}

/// `(endurance s, missions, actuation power W, perception power W) ->
/// (capacity Wh, cycles)`.
pub fn energy_dp() -> DesignProblem {
    let fun = Poset::product([seconds(), count(), watts(), watts()]);
    let res = Poset::pair(watt_hours(), count());
    DesignProblem::from_monotone_map(fun, res, |f| {
        let [t, m, pa, pp] = xs(f)[..] else { unreachable!() };
        reals(&[mul0(pa + pp, t) / 3600.0, m])
    })
    .named("energy")
}

/// `(capacity Wh, cycles) -> (total cost, mass g)`: mass is capacity over
/// energy density; cost pays for `max(1, ceil(cycles / tech cycles))`
/// purchases.
pub fn battery_dp(t: &BatteryTech) -> Result<DesignProblem> {
    for (k, v) in [("energy_density", t.energy_density), ("wh_per_usd", t.wh_per_usd), ("cycles", t.cycles)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(UavError::InvalidParameter(format!("{}.{k} = {v}", t.name)));
        }
    }
    let t = t.clone();
    let fun = Poset::pair(watt_hours(), count());
    let res = Poset::pair(dollars(), grams());
    let name = t.name.clone();
    Ok(DesignProblem::from_monotone_map(fun, res, move |f| {
        let [c, n] = xs(f)[..] else { unreachable!() };
        let purchases = (n / t.cycles).ceil().max(1.0);
        reals(&[mul0(c * t.cost_per_wh(), purchases), c / t.energy_density * 1000.0])
    })
    .named(name))
}

/// Energy stage followed by the battery; witnesses carry the technology.
pub fn battery_unit_dp(t: &BatteryTech) -> Result<DesignProblem> {
    Ok(dp::series(&energy_dp(), &battery_dp(t)?)?.tagged(t.name.clone()))
}

/// `(actuation cost, actuation mass, battery cost, battery mass, payload) ->
/// (lift N, self weight g, total cost)`; lift is the hover force of
/// everything carried.
pub fn airframe_dp() -> DesignProblem {
    let fun = Poset::product([dollars(), grams(), dollars(), grams(), grams()]);
    let res = Poset::product([newtons(), grams(), dollars()]);
    DesignProblem::from_monotone_map(fun, res, |f| {
        let [ca, ma, cb, mb, payload] = xs(f)[..] else { unreachable!() };
        reals(&[(payload + ma + mb) / 1000.0 * G, ma + mb, ca + cb])
    })
    .named("airframe")
}

fn route<M>(fun: Poset, res: Poset, map: M) -> DesignProblem
where
    M: Fn(&[Element]) -> Element + Send + Sync + 'static,
{
    DesignProblem::from_monotone_map(fun, res, move |f| map(f.components().expect("tuple")))
}

/// Payload to `(self_weight, total_cost)` for a fixed task profile and
/// battery, with free actuator choice, closing the mass loop (lift) by a
/// trace. Payloads the loop cannot carry report a divergence.
pub fn compose_uav(
    profile: &TaskProfile,
    perception: Perception,
    battery: &BatteryTech,
    actuators: &[ActuatorSpec],
) -> Result<DesignProblem> {
    compose_uav_with(profile, perception, battery_unit_dp(battery)?, &actuation_stages(actuators)?, TraceOptions::default())
}

/// [`compose_uav`] over arbitrary battery and actuation stages. Each
/// actuation alternative gets its own closed loop and the union is taken
/// outside; this has the same feasible set as the loop around the union
/// and keeps the Kleene antichain to a single candidate.
pub fn compose_uav_with(
    profile: &TaskProfile,
    perception: Perception,
    battery: DesignProblem,
    actuation: &[DesignProblem],
    opts: TraceOptions,
) -> Result<DesignProblem> {
    let loops = actuation
        .iter()
        .map(|a| Ok(dp::trace_with(&mass_loop_body(profile, perception, battery.clone(), a.clone())?, opts)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(dp::union_all(&loops)?
        .ok_or_else(|| UavError::InvalidParameter("empty actuator list".into()))?
        .named("uav"))
}

/// The open loop: `(payload, lift) -> ((self_weight, total_cost), lift)`.
pub fn mass_loop_body(
    profile: &TaskProfile,
    perception: Perception,
    battery: DesignProblem,
    actuation: DesignProblem,
) -> Result<DesignProblem> {
    check_param("num_missions", profile.num_missions)?;
    check_param("distance", profile.distance)?;
    let (d, m) = (profile.distance, profile.num_missions);
    let id = DesignProblem::identity;
    let g = grams;

    let s1 = route(
        Poset::pair(g(), newtons()),
        Poset::pair(Poset::pair(g(), newtons()), Poset::pair(meters(), count())),
        move |e| Element::pair(Element::pair(e[0].clone(), e[1].clone()), reals(&[d, m])),
    );
    let s2 = dp::parallel(&id(Poset::pair(g(), newtons())), &task_management_dp(profile.frequency)?)?;
    // ((payload, lift), (T, M, v)) -> (payload, (lift, v), v, (T, M))
    let s3 = route(
        s2.res_poset().clone(),
        Poset::product([g(), Poset::pair(newtons(), mps()), mps(), Poset::pair(seconds(), count())]),
        |e| {
            let pl = e[0].components().expect("payload, lift");
            let tmv = e[1].components().expect("task");
            Element::tuple([
                pl[0].clone(),
                Element::pair(pl[1].clone(), tmv[2].clone()),
                tmv[2].clone(),
                Element::pair(tmv[0].clone(), tmv[1].clone()),
            ])
        },
    );
    let s4 = dp::parallel_all(&[id(g()), actuation, perception_dp(perception)?, id(Poset::pair(seconds(), count()))])?;
    // (payload, (ca, ma, pa), pp, (T, M)) -> ((payload, ca, ma), (T, M, pa, pp))
    let s5 = route(
        s4.res_poset().clone(),
        Poset::pair(Poset::product([g(), dollars(), g()]), battery.fun_poset().clone()),
        |e| {
            let a = e[1].components().expect("actuation");
            let tm = e[3].components().expect("task");
            Element::pair(
                Element::tuple([e[0].clone(), a[0].clone(), a[1].clone()]),
                Element::tuple([tm[0].clone(), tm[1].clone(), a[2].clone(), e[2].clone()]),
            )
        },
    );
    let s6 = dp::parallel(&id(Poset::product([g(), dollars(), g()])), &battery)?;
    // ((payload, ca, ma), (cb, mb)) -> (ca, ma, cb, mb, payload)
    let s7 = route(s6.res_poset().clone(), airframe_dp().fun_poset().clone(), |e| {
        let pam = e[0].components().expect("payload, actuation");
        let b = e[1].components().expect("battery");
        Element::tuple([pam[1].clone(), pam[2].clone(), b[0].clone(), b[1].clone(), pam[0].clone()])
    });
    // (lift, self_weight, cost) -> ((self_weight, cost), lift)
    let s9 = route(airframe_dp().res_poset().clone(), Poset::pair(uav_res(), newtons()), |e| {
        Element::pair(Element::pair(e[1].clone(), e[2].clone()), e[0].clone())
    });
    Ok([s2, s3, s4, s5, s6, s7, airframe_dp(), s9].iter().try_fold(s1, |acc, s| dp::series(&acc, s))?)
}
