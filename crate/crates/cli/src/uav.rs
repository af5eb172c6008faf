use std::path::{Path, PathBuf};

use codp_uav::{
    default_grid, write_front_csv, write_records_csv, write_summaries_csv, Calibration, ComponentData, FrontPoint, Study,
    Summary, UAVQueryRecord, UavModel,
};
use serde_json::json;

use crate::grid::parse_grid;
use crate::histogram::{histogram, Bin};
use crate::plot::{Chart, Layer, PALETTE};
use crate::{
    read_input, to_json_bytes, write_output, CliError, DistributionArgs, Format, FrontArgs, ModelArgs, Result, SweepArgs,
    UavCommand,
};

pub(crate) fn run(cmd: UavCommand) -> Result<()> {
    match cmd {
        UavCommand::Front(a) => front(&a),
        UavCommand::Distribution(a) => distribution(&a),
        UavCommand::Sweep(a) => sweep(&a),
    }
}

fn model(args: &ModelArgs, zero_variance: bool) -> Result<UavModel> {
    let mut m = UavModel::default();
    if let Some(p) = &args.data {
        m.data = ComponentData::from_json(&read_input(p)?)?;
    }
    if zero_variance {
        m.calibration = Calibration::none();
    }
    Ok(m)
}

fn grid(text: &Option<String>) -> Result<Vec<f64>> {
    text.as_deref().map(parse_grid).unwrap_or_else(|| Ok(default_grid()))
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| CliError::Usage("--seed is required for sampling commands".into()))
}

/// Output files keyed by format. Without `--out` exactly one format is
/// allowed and its primary file goes to stdout.
struct Outputs {
    dir: Option<PathBuf>,
    formats: Vec<Format>,
}

impl Outputs {
    fn new(args: &ModelArgs) -> Result<Self> {
        let mut formats = args.format.clone();
        formats.sort();
        formats.dedup();
        if formats.is_empty() {
            formats = if args.out.is_some() { vec![Format::Csv, Format::Json] } else { vec![Format::Csv] };
        }
        if args.out.is_none() && formats.len() > 1 {
            return Err(CliError::Usage("several formats need --out DIR".into()));
        }
        if let Some(d) = &args.out {
            std::fs::create_dir_all(d).map_err(|source| CliError::Output { path: d.display().to_string(), source })?;
        }
        Ok(Outputs { dir: args.out.clone(), formats })
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Writes `files` (name, bytes) for format `f`; on stdout only the first.
    fn emit(&self, f: Format, files: Vec<(&str, Vec<u8>)>) -> Result<()> {
        if !self.wants(f) {
            return Ok(());
        }
        match &self.dir {
            Some(d) => {
                for (name, bytes) in files {
                    write_output(&Path::new(d).join(name), &bytes)?;
                }
                Ok(())
            }
            None => {
                use std::io::Write;
                let (_, bytes) = files.into_iter().next().expect("at least one file");
                std::io::stdout().write_all(&bytes).map_err(|source| CliError::Output { path: "stdout".into(), source })
            }
        }
    }
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> codp_uav::Result<()>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write(&mut out)?;
    Ok(out)
}

fn tech_color(techs: &[String], t: &str) -> String {
    PALETTE[techs.iter().position(|x| x == t).unwrap_or(0) % PALETTE.len()].to_string()
}

fn front(args: &FrontArgs) -> Result<()> {
    let out = Outputs::new(&args.model)?;
    let m = model(&args.model, false)?;
    let front = m.deterministic_front(&grid(&args.grid)?)?;
    out.emit(Format::Csv, vec![("front.csv", csv_bytes(|w| write_front_csv(&front, w))?)])?;
    out.emit(Format::Json, vec![("front.json", to_json_bytes(&front)?)])?;
    if out.wants(Format::Svg) {
        out.emit(Format::Svg, vec![("front.svg", front_svg(&m.data.tech_names(), &front).into_bytes())])?;
    }
    Ok(())
}

fn front_svg(techs: &[String], front: &[FrontPoint]) -> String {
    let feasible: Vec<(f64, f64)> =
        front.iter().filter_map(|p| p.outcome.min_cost().map(|c| (p.payload_g, c))).collect();
    let mut chart = Chart::new("Cost-optimal front", "payload [g]", "lifetime cost [USD]").layer(Layer::Line {
        label: "front".into(),
        color: "#888888".into(),
        points: feasible,
    });
    for t in techs {
        let points: Vec<(f64, f64)> = front
            .iter()
            .filter(|p| p.battery_tech.as_deref() == Some(t.as_str()))
            .filter_map(|p| p.outcome.min_cost().map(|c| (p.payload_g, c)))
            .collect();
        if !points.is_empty() {
            chart = chart.layer(Layer::Markers { label: t.clone(), color: tech_color(techs, t), points });
        }
    }
    chart.render()
}

fn histogram_csv(bins: &[Bin]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["bin_lo", "bin_hi", "count"]).map_err(err)?;
    for b in bins {
        w.write_record([b.lo.to_string(), b.hi.to_string(), b.count.to_string()]).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
}

fn distribution(args: &DistributionArgs) -> Result<()> {
    let seed = require_seed(args.seed)?;
    if args.bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let out = Outputs::new(&args.model)?;
    let study = Study::new(model(&args.model, args.zero_variance)?)?;
    let d = study.cost_distribution(&args.tech, args.payload, args.n, seed)?;
    let costs: Vec<f64> = d.records.iter().filter_map(|r| r.outcome.min_cost()).collect();
    let bins = histogram(&costs, args.bins);
    out.emit(
        Format::Csv,
        vec![("histogram.csv", histogram_csv(&bins)?), ("records.csv", csv_bytes(|w| write_records_csv(&d.records, w))?)],
    )?;
    out.emit(
        Format::Json,
        vec![("summary.json", to_json_bytes(&json!({ "seed": seed, "summary": d.summary, "histogram": bins }))?)],
    )?;
    if out.wants(Format::Svg) {
        let title = format!("{} at {} g, n = {}, infeasible {:.1}%", args.tech, args.payload, d.summary.n, 100.0 * d.summary.infeasible_fraction);
        let chart = Chart::new(&title, "lifetime cost [USD]", "draws").layer(Layer::Bars {
            color: PALETTE[0].into(),
            bars: bins.iter().map(|b| (b.lo, b.hi, b.count as f64)).collect(),
        });
        out.emit(Format::Svg, vec![("histogram.svg", chart.render().into_bytes())])?;
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let seed = require_seed(args.seed)?;
    let out = Outputs::new(&args.model)?;
    let study = Study::new(model(&args.model, args.zero_variance)?)?;
    let all = study.model().data.tech_names();
    let techs = if args.tech.is_empty() { all.clone() } else { args.tech.clone() };
    let grid = grid(&args.grid)?;
    let mut records: Vec<UAVQueryRecord> = Vec::new();
    let mut summaries: Vec<Summary> = Vec::new();
    for t in &techs {
        let s = study.payload_sweep(t, &grid, args.n, seed)?;
        records.extend(s.records);
        summaries.extend(s.summaries);
    }
    records.sort_by(|a, b| {
        (&a.battery_tech, a.payload_g, a.seed).partial_cmp(&(&b.battery_tech, b.payload_g, b.seed)).expect("finite")
    });
    summaries.sort_by(|a, b| (&a.battery_tech, a.payload_g).partial_cmp(&(&b.battery_tech, b.payload_g)).expect("finite"));
    out.emit(
        Format::Csv,
        vec![
            ("records.csv", csv_bytes(|w| write_records_csv(&records, w))?),
            ("summary.csv", csv_bytes(|w| write_summaries_csv(&summaries, w))?),
        ],
    )?;
    out.emit(Format::Json, vec![("summary.json", to_json_bytes(&json!({ "seed": seed, "n": args.n, "summaries": summaries }))?)])?;
    if out.wants(Format::Svg) {
        let mut chart = Chart::new(&format!("Cost quantiles, n = {}", args.n), "payload [g]", "lifetime cost [USD]");
        for t in &techs {
            let cells: Vec<&Summary> = summaries.iter().filter(|s| &s.battery_tech == t).collect();
            let band: Vec<(f64, f64, f64)> =
                cells.iter().filter_map(|s| s.quantiles.as_ref().map(|q| (s.payload_g, q.q05, q.q95))).collect();
            let median: Vec<(f64, f64)> =
                cells.iter().filter_map(|s| s.quantiles.as_ref().map(|q| (s.payload_g, q.q50))).collect();
            let color = tech_color(&all, t);
            chart = chart
                .layer(Layer::Band { label: t.clone(), color: color.clone(), points: band })
                .layer(Layer::Line { label: t.clone(), color, points: median });
        }
        out.emit(Format::Svg, vec![("quantiles.svg", chart.render().into_bytes())])?;
    }
    Ok(())
}
