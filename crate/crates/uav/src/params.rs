use serde::{Deserialize, Serialize};

use crate::{Result, UavError};

/// Gravitational acceleration used by the hover-lift model, m/s².
pub const G: f64 = 9.81;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskProfile {
    pub num_missions: f64,
    /// Meters per mission.
    pub distance: f64,
    /// Missions per second.
    pub frequency: f64,
}

impl Default for TaskProfile {
    /// 1000 missions of 1200 m, one every 480 s: 2.5 m/s cruise.
    fn default() -> Self {
        TaskProfile { num_missions: 1000.0, distance: 1200.0, frequency: 1.0 / 480.0 }
    }
}

/// Affine perception power model `c0 + c1 * velocity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perception {
    pub c0: f64,
    pub c1: f64,
}

impl Default for Perception {
    fn default() -> Self {
        Perception { c0: 5.0, c1: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActuatorSpec {
    pub name: String,
    #[serde(rename = "mass_g")]
    pub mass: f64,
    #[serde(rename = "cost_usd")]
    pub cost: f64,
    #[serde(rename = "max_velocity_mps")]
    pub max_velocity: f64,
    #[serde(rename = "p0_w")]
    pub p0: f64,
    #[serde(rename = "p1_w_per_n2")]
    pub p1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryTech {
    pub name: String,
    /// Wh/kg.
    #[serde(rename = "energy_density_wh_per_kg")]
    pub energy_density: f64,
    /// Wh per dollar, as tabulated; see [`BatteryTech::cost_per_wh`].
    #[serde(rename = "wh_per_usd")]
    pub wh_per_usd: f64,
    pub cycles: f64,
}

impl BatteryTech {
    /// Dollars per Wh.
    pub fn cost_per_wh(&self) -> f64 {
        1.0 / self.wh_per_usd
    }
}

/// A record whose numeric fields can be perturbed by name.
pub trait ParamRecord: Clone + Send + Sync + 'static {
    const FIELDS: &'static [&'static str];
    fn get(&self, field: &str) -> Option<f64>;
    fn set(&mut self, field: &str, value: f64) -> bool;
}

impl ParamRecord for ActuatorSpec {
    const FIELDS: &'static [&'static str] = &["mass", "cost", "max_velocity", "p0", "p1"];

    fn get(&self, field: &str) -> Option<f64> {
        Some(match field {
            "mass" => self.mass,
            "cost" => self.cost,
            "max_velocity" => self.max_velocity,
            "p0" => self.p0,
            "p1" => self.p1,
            _ => return None,
        })
    }

    fn set(&mut self, field: &str, value: f64) -> bool {
        let slot = match field {
            "mass" => &mut self.mass,
            "cost" => &mut self.cost,
            "max_velocity" => &mut self.max_velocity,
            "p0" => &mut self.p0,
            "p1" => &mut self.p1,
            _ => return false,
        };
        *slot = value;
        true
    }
}

impl ParamRecord for BatteryTech {
    const FIELDS: &'static [&'static str] = &["energy_density", "wh_per_usd", "cycles"];

    fn get(&self, field: &str) -> Option<f64> {
        Some(match field {
            "energy_density" => self.energy_density,
            "wh_per_usd" => self.wh_per_usd,
            "cycles" => self.cycles,
            _ => return None,
        })
    }

    fn set(&mut self, field: &str, value: f64) -> bool {
        let slot = match field {
            "energy_density" => &mut self.energy_density,
            "wh_per_usd" => &mut self.wh_per_usd,
            "cycles" => &mut self.cycles,
            _ => return false,
        };
        *slot = value;
        true
    }
}

/// Actuator and battery tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentData {
    pub version: u32,
    pub actuators: Vec<ActuatorSpec>,
    pub batteries: Vec<BatteryTech>,
}

const COMPONENTS_JSON: &str = include_str!("../data/components.json");

impl ComponentData {
    /// The shipped tables.
    pub fn builtin() -> Self {
        Self::from_json(COMPONENTS_JSON).expect("shipped component data is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let data: ComponentData = serde_json::from_str(text).map_err(|e| UavError::Data(e.to_string()))?;
        for a in &data.actuators {
            if ActuatorSpec::FIELDS.iter().any(|f| a.get(f).is_none_or(|x| !(x >= 0.0) || !x.is_finite())) {
                return Err(UavError::Data(format!("actuator {} has a negative or non-finite field", a.name)));
            }
        }
        for b in &data.batteries {
            if BatteryTech::FIELDS.iter().any(|f| b.get(f).is_none_or(|x| !(x > 0.0) || !x.is_finite())) {
                return Err(UavError::Data(format!("battery {} has a non-positive field", b.name)));
            }
        }
        Ok(data)
    }

    pub fn battery(&self, name: &str) -> Result<&BatteryTech> {
        self.batteries.iter().find(|b| b.name == name).ok_or_else(|| UavError::UnknownTech(name.to_string()))
    }

    pub fn tech_names(&self) -> Vec<String> {
        self.batteries.iter().map(|b| b.name.clone()).collect()
    }
}
