use std::io::Write;

use codp_core::dp::{DesignProblem, DpError};
use codp_core::seed;
use codp_core::uncertainty::MarkovKernel;
use codp_core::Element;
use rayon::prelude::*;
use serde::Serialize;

use crate::kernel::{delta_profile, uav_kernel, UavModel};
use crate::params::TaskProfile;
use crate::{Result, UavError};

/// The result of one minimal-cost query.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Feasible {
        min_cost_usd: f64,
        self_weight_g: f64,
        /// Implementation choices realizing the optimum.
        witness: Vec<String>,
    },
    Infeasible,
}

impl Outcome {
    pub fn min_cost(&self) -> Option<f64> {
        match self {
            Outcome::Feasible { min_cost_usd, .. } => Some(*min_cost_usd),
            Outcome::Infeasible => None,
        }
    }

    pub fn self_weight(&self) -> Option<f64> {
        match self {
            Outcome::Feasible { self_weight_g, .. } => Some(*self_weight_g),
            Outcome::Infeasible => None,
        }
    }

    pub fn witness(&self) -> &[String] {
        match self {
            Outcome::Feasible { witness, .. } => witness,
            Outcome::Infeasible => &[],
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Outcome::Feasible { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UAVQueryRecord {
    pub battery_tech: String,
    pub payload_g: f64,
    /// The seed the sampled design problem was drawn with.
    pub seed: u64,
    pub outcome: Outcome,
}

/// Minimal lifetime cost at `payload`, ties broken by self weight. An empty
/// front or a diverging mass loop is infeasible.
pub fn min_cost(dp: &DesignProblem, payload: f64) -> Result<Outcome> {
    let r = match dp.query_fix_fun_min_res(&Element::real(payload)) {
        Ok(r) => r,
        Err(DpError::Divergence { .. }) => return Ok(Outcome::Infeasible),
        Err(e) => return Err(e.into()),
    };
    let best = r
        .iter()
        .map(|(e, w)| {
            let c = e.components().expect("(self_weight, cost)");
            (c[1].as_real().expect("real"), c[0].as_real().expect("real"), w)
        })
        .filter(|(c, s, _)| c.is_finite() && s.is_finite())
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(match best {
        Some((c, s, w)) => Outcome::Feasible { min_cost_usd: c, self_weight_g: s, witness: w.choices.to_vec() },
        None => Outcome::Infeasible,
    })
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantiles {
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

/// Per-(tech, payload) summary; cost statistics are over feasible draws
/// and absent when there are none.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub battery_tech: String,
    pub payload_g: f64,
    pub n: usize,
    pub feasible: usize,
    pub infeasible_fraction: f64,
    pub mean: Option<f64>,
    pub quantiles: Option<Quantiles>,
}

impl Summary {
    pub fn of(battery_tech: &str, payload_g: f64, records: &[&UAVQueryRecord]) -> Summary {
        let mut costs: Vec<f64> = records.iter().filter_map(|r| r.outcome.min_cost()).collect();
        costs.sort_by(f64::total_cmp);
        let n = records.len();
        let mean = (!costs.is_empty()).then(|| costs.iter().sum::<f64>() / costs.len() as f64);
        let quantiles = (!costs.is_empty()).then(|| Quantiles {
            q05: quantile(&costs, 0.05).unwrap(),
            q50: quantile(&costs, 0.50).unwrap(),
            q95: quantile(&costs, 0.95).unwrap(),
        });
        Summary {
            battery_tech: battery_tech.to_string(),
            payload_g,
            n,
            feasible: costs.len(),
            infeasible_fraction: if n == 0 { 0.0 } else { (n - costs.len()) as f64 / n as f64 },
            mean,
            quantiles,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostDistribution {
    pub summary: Summary,
    pub records: Vec<UAVQueryRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub summaries: Vec<Summary>,
    /// Sorted by (tech, payload, seed).
    pub records: Vec<UAVQueryRecord>,
}

/// One point of the deterministic cost-optimal front.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrontPoint {
    pub payload_g: f64,
    /// Cost-optimal technology, `None` when every technology is infeasible.
    pub battery_tech: Option<String>,
    pub outcome: Outcome,
}

/// The payload grid `0, 50, ..., 2000` g.
pub fn default_grid() -> Vec<f64> {
    (0..=40).map(|i| i as f64 * 50.0).collect()
}

/// Monte Carlo experiments over a kernel from battery technology to
/// composites. Draw `i` of a run with root seed `r` uses `split(r, i)`.
pub struct Study {
    model: UavModel,
    kernel: MarkovKernel<String, DesignProblem>,
}

impl Study {
    /// Fixed task profile.
    pub fn new(model: UavModel) -> Result<Self> {
        let profile = delta_profile(&model.profile);
        Self::with_profile(model, &profile)
    }

    pub fn with_profile(model: UavModel, profile: &MarkovKernel<(), TaskProfile>) -> Result<Self> {
        let kernel = uav_kernel(&model, profile)?;
        Ok(Study { model, kernel })
    }

    pub fn model(&self) -> &UavModel {
        &self.model
    }

    pub fn kernel(&self) -> &MarkovKernel<String, DesignProblem> {
        &self.kernel
    }

    /// Draws `n` composites for `tech` and queries each at every payload.
    pub fn payload_sweep(&self, tech: &str, grid: &[f64], n: usize, root_seed: u64) -> Result<Sweep> {
        if grid.is_empty() {
            return Err(UavError::InvalidParameter("empty payload grid".into()));
        }
        if n == 0 {
            return Err(UavError::InvalidParameter("n must be at least 1".into()));
        }
        if let Some(p) = grid.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(UavError::InvalidParameter(format!("payload {p}")));
        }
        self.model.data.battery(tech)?;
        let tech_s = tech.to_string();
        let per_draw: Vec<Vec<UAVQueryRecord>> = (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let s = seed::split(root_seed, i);
                let dp = self.kernel.draw(&tech_s, s).map_err(UavError::from)?;
                grid.iter()
                    .map(|&p| {
                        Ok(UAVQueryRecord { battery_tech: tech_s.clone(), payload_g: p, seed: s, outcome: min_cost(&dp, p)? })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let mut records: Vec<UAVQueryRecord> = per_draw.into_iter().flatten().collect();
        records.sort_by(|a, b| {
            (&a.battery_tech, a.payload_g, a.seed)
                .partial_cmp(&(&b.battery_tech, b.payload_g, b.seed))
                .expect("finite payloads")
        });
        let mut summaries = Vec::new();
        for &p in grid {
            let cell: Vec<&UAVQueryRecord> = records.iter().filter(|r| r.payload_g == p).collect();
            summaries.push(Summary::of(tech, p, &cell));
        }
        Ok(Sweep { summaries, records })
    }

    pub fn cost_distribution(&self, tech: &str, payload: f64, n: usize, root_seed: u64) -> Result<CostDistribution> {
        let sweep = self.payload_sweep(tech, &[payload], n, root_seed)?;
        Ok(CostDistribution { summary: sweep.summaries.into_iter().next().expect("one cell"), records: sweep.records })
    }
}

impl UavModel {
    /// Minimal lifetime cost over all technologies at each payload, ties
    /// broken by self weight and then by table order.
    pub fn deterministic_front(&self, grid: &[f64]) -> Result<Vec<FrontPoint>> {
        let dps = self
            .data
            .batteries
            .iter()
            .map(|b| Ok((b.name.clone(), self.compose(&b.name)?)))
            .collect::<Result<Vec<_>>>()?;
        grid.par_iter()
            .map(|&p| {
                let mut best: Option<(String, Outcome)> = None;
                for (name, dp) in &dps {
                    let o = min_cost(dp, p)?;
                    let better = match (&best, &o) {
                        (_, Outcome::Infeasible) => false,
                        (None, _) => true,
                        (Some((_, b)), o) => {
                            (o.min_cost(), o.self_weight()) < (b.min_cost(), b.self_weight())
                        }
                    };
                    if better {
                        best = Some((name.clone(), o));
                    }
                }
                Ok(match best {
                    Some((t, o)) => FrontPoint { payload_g: p, battery_tech: Some(t), outcome: o },
                    None => FrontPoint { payload_g: p, battery_tech: None, outcome: Outcome::Infeasible },
                })
            })
            .collect()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV with columns `tech, payload_g, seed, feasible, min_cost_usd,
/// self_weight_g`; cost and weight are empty when infeasible.
pub fn write_records_csv<W: Write>(records: &[UAVQueryRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tech", "payload_g", "seed", "feasible", "min_cost_usd", "self_weight_g"])?;
    for r in records {
        w.write_record([
            r.battery_tech.clone(),
            r.payload_g.to_string(),
            r.seed.to_string(),
            r.outcome.is_feasible().to_string(),
            opt(r.outcome.min_cost()),
            opt(r.outcome.self_weight()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with columns `payload_g, feasible, min_cost_usd, self_weight_g,
/// tech, witness`.
pub fn write_front_csv<W: Write>(front: &[FrontPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["payload_g", "feasible", "min_cost_usd", "self_weight_g", "tech", "witness"])?;
    for p in front {
        w.write_record([
            p.payload_g.to_string(),
            p.outcome.is_feasible().to_string(),
            opt(p.outcome.min_cost()),
            opt(p.outcome.self_weight()),
            p.battery_tech.clone().unwrap_or_default(),
            p.outcome.witness().join("+"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV of per-cell summaries.
pub fn write_summaries_csv<W: Write>(summaries: &[Summary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tech", "payload_g", "n", "feasible", "infeasible_fraction", "mean", "q05", "q50", "q95"])?;
    for s in summaries {
        let q = s.quantiles.as_ref();
        w.write_record([
            s.battery_tech.clone(),
            s.payload_g.to_string(),
            s.n.to_string(),
            s.feasible.to_string(),
            s.infeasible_fraction.to_string(),
            opt(s.mean),
            opt(q.map(|q| q.q05)),
            opt(q.map(|q| q.q50)),
            opt(q.map(|q| q.q95)),
        ])?;
    }
    w.flush()?;
    Ok(())
}
