//! Acceptance criteria 1 to 10, one PASS/FAIL line each. Run a subset with
//! `cargo test --test acceptance -- 5 7`.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use codp_core::dp::{self, BinaryOp, DesignProblem, DpError};
use codp_core::seed;
use codp_core::uncertainty::{
    delta_sampler, dist_lift_binary, dist_lift_trace, interval_lift, interval_trace, kernel_compose, kernel_lift,
    merge_pmf, param_lift, param_trace, IntervalDP, MarkovKernel, ParameterizedDP, Space,
};
use codp_core::{Element, Poset};
use codp_dsl::{elaborate, format, parse, Registry};
use codp_testkit::diagram::{diagram_relation, outer_ports};
use codp_testkit::{
    codp_files, distribution_trial_z, fixture_dir, mass_loop, random_bounded_poset, random_interval, random_poset, rng,
    Case, Composition, Relation,
};
use codp_uav::{default_grid, delta_profile, min_cost, uav_kernel, FrontPoint, Outcome, Study, UavModel};
use mimalloc::MiMalloc;
use rayon::prelude::*;

#[global_allocator]
static GLOBAL: MiMalloc = MiMalloc;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn relation_op(op: BinaryOp, a: &Relation, b: &Relation) -> Relation {
    match op {
        BinaryOp::Series => Relation::series(a, b),
        BinaryOp::Parallel => Relation::parallel(a, b),
        BinaryOp::Union => Relation::union(a, b),
        BinaryOp::Intersection => Relation::intersection(a, b),
    }
}

fn composition_oracle() -> Verdict {
    let cases: Vec<(Composition, u64)> =
        Composition::ALL.iter().flat_map(|&op| (0..60).map(move |s| (op, 10_000 + s))).collect();
    let bad: Vec<String> = cases
        .par_iter()
        .filter_map(|&(op, s)| {
            let c = Case::random(op, s, 6);
            (Relation::of(&c.composite()).pairs != c.expected().pairs).then(|| format!("{op:?}/{s}"))
        })
        .collect();
    verdict(cases.len() >= 200 && bad.is_empty(), format!("{} cases, {} mismatches {bad:?}", cases.len(), bad.len()))
}

/// Lower mismatches, upper mismatches and containment violations of one
/// random interval case per binary operation and one trace case.
fn interval_case(s: u64) -> [usize; 3] {
    let mut out = [0; 3];
    let mut r = rng(s);
    for op in BinaryOp::ALL {
        let (f, res) = (random_poset(&mut r, "f", 3), random_poset(&mut r, "r", 3));
        let (g, t) = match op {
            BinaryOp::Series => (res.clone(), random_poset(&mut r, "t", 3)),
            BinaryOp::Parallel => (random_poset(&mut r, "g", 3), random_poset(&mut r, "t", 3)),
            _ => (f.clone(), res.clone()),
        };
        let (al, au) = random_interval(&mut r, &f, &res);
        let (bl, bu) = random_interval(&mut r, &g, &t);
        let lifted =
            interval_lift(op, &IntervalDP::new(al.clone(), au.clone()).unwrap(), &IntervalDP::new(bl.clone(), bu.clone()).unwrap())
                .unwrap();
        out[0] += usize::from(Relation::of(lifted.lower()).pairs != relation_op(op, &Relation::of(&al), &Relation::of(&bl)).pairs);
        out[1] += usize::from(Relation::of(lifted.upper()).pairs != relation_op(op, &Relation::of(&au), &Relation::of(&bu)).pairs);
        out[2] += usize::from(!lifted.containment_holds(&lifted.lower().fun_poset().enumerate().unwrap()).unwrap());
    }
    let (p, q, l) = (random_poset(&mut r, "p", 3), random_poset(&mut r, "q", 3), random_bounded_poset(&mut r, "l", 4));
    let (lo, up) = random_interval(&mut r, &Poset::pair(p, l.clone()), &Poset::pair(q, l));
    let traced = interval_trace(&IntervalDP::new(lo.clone(), up.clone()).unwrap()).unwrap();
    out[0] += usize::from(Relation::of(traced.lower()).pairs != Relation::trace(&Relation::of(&lo)).pairs);
    out[1] += usize::from(Relation::of(traced.upper()).pairs != Relation::trace(&Relation::of(&up)).pairs);
    out[2] += usize::from(!traced.containment_holds(&traced.lower().fun_poset().enumerate().unwrap()).unwrap());
    out
}

fn interval_lifting() -> Verdict {
    let seeds: Vec<u64> = (0..50).map(|s| 20_000 + s).collect();
    let totals = seeds.par_iter().map(|&s| interval_case(s)).reduce(|| [0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    let cases = seeds.len() * (BinaryOp::ALL.len() + 1);
    verdict(
        cases >= 200 && totals == [0; 3],
        format!("{cases} cases, lower mismatches {}, upper mismatches {}, containment violations {}", totals[0], totals[1], totals[2]),
    )
}

fn same_queries(a: &DesignProblem, b: &DesignProblem, at: &[Element]) -> bool {
    at.iter().all(|f| match (a.query_fix_fun_min_res(f), b.query_fix_fun_min_res(f)) {
        (Ok(x), Ok(y)) => x == y,
        (Err(DpError::Divergence { .. }), Err(DpError::Divergence { .. })) => true,
        _ => false,
    })
}

fn delta_coherence() -> Verdict {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for op in Composition::ALL {
        for s in 0..20 {
            let case = Case::random(op, 30_000 + s, 5);
            let want = case.composite();
            let fs = want.fun_poset().enumerate().unwrap();
            let o = &case.operands;
            let deltas: Vec<_> = o.iter().map(delta_sampler).collect();
            let mut got = Vec::new();
            if let Composition::Trace = op {
                got.push(dist_lift_trace(&deltas[0]).unwrap().draw(s).unwrap());
                let pt = param_trace(&ParameterizedDP::constant(Space::finite(["m"]), &o[0])).unwrap();
                got.push(pt.build(&"m".to_string()).unwrap());
                got.push(pt.as_kernel().draw(&"m".to_string(), s).unwrap());
            } else {
                let bop = match op {
                    Composition::Series => BinaryOp::Series,
                    Composition::Parallel => BinaryOp::Parallel,
                    Composition::Union => BinaryOp::Union,
                    _ => BinaryOp::Intersection,
                };
                got.push(dist_lift_binary(bop, &deltas[0], &deltas[1]).unwrap().draw(s).unwrap());
                let pa = ParameterizedDP::constant(Space::finite(["m"]), &o[0]);
                let pb = ParameterizedDP::constant(Space::finite(["n"]), &o[1]);
                let key = ("m".to_string(), "n".to_string());
                got.push(param_lift(bop, &pa, &pb).unwrap().build(&key).unwrap());
                got.push(kernel_lift(bop, &pa.as_kernel(), &pb.as_kernel()).unwrap().draw(&key, s).unwrap());
            }
            for (i, g) in got.iter().enumerate() {
                checked += 1;
                if !same_queries(g, &want, &fs) {
                    bad.push(format!("{op:?}/{s}/{i}"));
                }
            }
        }
    }

    let model = UavModel::deterministic();
    let kernel = uav_kernel(&model, &delta_profile(&model.profile)).unwrap();
    let grid: Vec<Element> = (0..=8).map(|i| Element::real(i as f64 * 250.0)).collect();
    for tech in model.data.tech_names() {
        let want = model.compose(&tech).unwrap();
        for s in [1, 2] {
            checked += 1;
            if !same_queries(&kernel.draw(&tech, s).unwrap(), &want, &grid) {
                bad.push(format!("uav {tech}/{s}"));
            }
        }
    }
    verdict(bad.is_empty(), format!("{checked} lifted composites, {} mismatches {bad:?}", bad.len()))
}

fn distributional_lift() -> Verdict {
    let zs: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|t| distribution_trial_z(BinaryOp::ALL[t as usize % 4], 40_000 + t, 10_000, seed::split(4, t)))
        .collect();
    let outside: Vec<usize> = (0..zs.len()).filter(|&t| !(zs[t] <= 3.0)).collect();
    let ok = zs.len() - outside.len();
    let worst = zs.iter().copied().fold(0.0, f64::max);
    verdict(ok >= 99, format!("{ok}/100 trials within 3 sigma at n = 10000, largest |z| {worst:.2}, outside {outside:?}"))
}

fn trace_fixed_point() -> Verdict {
    let m0 = 100.0;
    let mut notes = Vec::new();
    let mut pass = true;
    for k in [0.1, 0.5, 0.9] {
        let got = dp::trace(&mass_loop(k)).unwrap().query(&Element::real(m0)).map(|a| a.elements()[0].as_real());
        let want = m0 / (1.0 - k);
        match got {
            Ok(Some(x)) => {
                let rel = ((x - want) / want).abs();
                pass &= rel < 1e-6;
                notes.push(format!("k={k} rel {rel:.1e}"));
            }
            other => {
                pass = false;
                notes.push(format!("k={k} {other:?}"));
            }
        }
    }
    for k in [1.0, 1.5, 3.0] {
        let diverged = matches!(dp::trace(&mass_loop(k)).unwrap().query(&Element::real(m0)), Err(DpError::Divergence { .. }));
        pass &= diverged;
        notes.push(format!("k={k} {}", if diverged { "diverges" } else { "FINITE" }));
    }
    verdict(pass, notes.join(", "))
}

fn front_properties(front: &[FrontPoint]) -> (bool, BTreeSet<String>) {
    let costs: Vec<f64> = front.iter().map(|p| p.outcome.min_cost().unwrap_or(f64::INFINITY)).collect();
    let monotone = costs.windows(2).all(|w| w[0] <= w[1]);
    (monotone, front.iter().filter_map(|p| p.battery_tech.clone()).collect())
}

fn deterministic_study() -> Verdict {
    let front = UavModel::default().deterministic_front(&default_grid()).unwrap();
    let (monotone, techs) = front_properties(&front);
    let feasible = front.iter().filter(|p| p.outcome.is_feasible()).count();
    verdict(
        monotone && techs.len() >= 2,
        format!("{} payloads, {feasible} feasible, monotone {monotone}, technologies {techs:?}", front.len()),
    )
}

/// The cheapest technology per payload from per-technology outcomes, with
/// the tie-breaking of the deterministic front.
fn best_per_payload(grid: &[f64], per_tech: &[(String, Vec<Outcome>)]) -> Vec<FrontPoint> {
    grid.iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut best: Option<(&String, &Outcome)> = None;
            for (t, outs) in per_tech {
                let o = &outs[i];
                if !o.is_feasible() {
                    continue;
                }
                if best.is_none_or(|(_, b)| (o.min_cost(), o.self_weight()) < (b.min_cost(), b.self_weight())) {
                    best = Some((t, o));
                }
            }
            match best {
                Some((t, o)) => FrontPoint { payload_g: p, battery_tech: Some(t.clone()), outcome: o.clone() },
                None => FrontPoint { payload_g: p, battery_tech: None, outcome: Outcome::Infeasible },
            }
        })
        .collect()
}

fn uncertain_study() -> Verdict {
    const N: usize = 1000;
    const BATCHES: u64 = 10;
    const ROOT: u64 = 2024;
    let grid: Vec<f64> = (0..=8).map(|i| i as f64 * 250.0).collect();
    let study = Study::new(UavModel::default()).unwrap();
    let techs = study.model().data.tech_names();
    let per = N as u64 / BATCHES;
    let batch_of: BTreeMap<u64, u64> = (0..N as u64).map(|i| (seed::split(ROOT, i), i / per)).collect();

    let (mut unstable, mut unordered, mut intermediate) = (Vec::new(), Vec::new(), 0);
    for tech in &techs {
        let sweep = study.payload_sweep(tech, &grid, N, ROOT).unwrap();
        for s in &sweep.summaries {
            let cell: Vec<_> = sweep.records.iter().filter(|r| r.payload_g == s.payload_g).collect();
            let p = s.infeasible_fraction;
            if p > 0.0 && p < 1.0 {
                intermediate += 1;
            }
            let bound = 3.0 * (p * (1.0 - p) / per as f64).sqrt();
            for b in 0..BATCHES {
                let in_batch: Vec<_> = cell.iter().filter(|r| batch_of[&r.seed] == b).collect();
                let pb = in_batch.iter().filter(|r| !r.outcome.is_feasible()).count() as f64 / in_batch.len() as f64;
                if (pb - p).abs() > bound + 1e-12 {
                    unstable.push(format!("{tech}@{} batch {b}: {pb} vs {p:.3}", s.payload_g));
                }
            }
            if let Some(q) = &s.quantiles {
                if !(q.q05 <= q.q50 && q.q50 <= q.q95) {
                    unordered.push(format!("{tech}@{}", s.payload_g));
                }
            }
        }
    }

    let zero = Study::new(UavModel::deterministic()).unwrap();
    let det_grid = default_grid();
    let per_tech: Vec<(String, Vec<Outcome>)> = techs
        .iter()
        .map(|t| {
            let sweep = zero.payload_sweep(t, &det_grid, 3, ROOT).unwrap();
            let outs: Vec<Outcome> = det_grid
                .iter()
                .map(|&p| {
                    let cell: Vec<&Outcome> = sweep.records.iter().filter(|r| r.payload_g == p).map(|r| &r.outcome).collect();
                    assert!(cell.windows(2).all(|w| w[0] == w[1]), "zero-variance draws differ");
                    cell[0].clone()
                })
                .collect();
            (t.clone(), outs)
        })
        .collect();
    let reproduced = best_per_payload(&det_grid, &per_tech) == UavModel::default().deterministic_front(&det_grid).unwrap();
    let per_tech_exact = techs.iter().zip(&per_tech).all(|(t, (_, outs))| {
        let dp = UavModel::default().compose(t).unwrap();
        det_grid.iter().zip(outs).all(|(&p, o)| &min_cost(&dp, p).unwrap() == o)
    });

    verdict(
        unstable.is_empty() && unordered.is_empty() && reproduced && per_tech_exact,
        format!(
            "(a) {} cells ({intermediate} with 0 < p < 1) x {BATCHES} batches, {} outside 3 sigma {unstable:?}; \
             (b) {} cells with unordered quantiles; (c) zero-variance front reproduced {reproduced}, per-technology exact {per_tech_exact}",
            techs.len() * grid.len(),
            unstable.len(),
            unordered.len()
        ),
    )
}

type Table = Vec<(&'static str, Vec<(&'static str, f64)>)>;

fn kernel_from(domain: &[&'static str], codomain: &[&'static str], rows: Table) -> MarkovKernel<String, String> {
    MarkovKernel::finite(Space::finite(domain.iter().copied()), Space::finite(codomain.iter().copied()), move |a: &String| {
        let row = &rows.iter().find(|(k, _)| k == a).expect("row").1;
        Ok(row.iter().map(|(b, w)| (b.to_string(), *w)).collect())
    })
}

fn pmf_row(k: &MarkovKernel<String, String>, a: &str) -> BTreeMap<String, f64> {
    merge_pmf(k.pmf(&a.to_string()).expect("finite").expect("pmf")).into_iter().filter(|(_, w)| *w != 0.0).collect()
}

fn expect_table(k: &MarkovKernel<String, String>, want: &[(&str, &[(&str, f64)])]) -> bool {
    want.iter().all(|(a, row)| {
        let want: BTreeMap<String, f64> = row.iter().filter(|(_, w)| *w != 0.0).map(|(b, w)| (b.to_string(), *w)).collect();
        pmf_row(k, a) == want
    })
}

fn kernel_algebra() -> Verdict {
    let two = kernel_from(
        &["s0", "s1"],
        &["s0", "s1"],
        vec![("s0", vec![("s0", 0.75), ("s1", 0.25)]), ("s1", vec![("s0", 0.5), ("s1", 0.5)])],
    );
    let square = kernel_compose(&two, &two).unwrap();
    let two_state = expect_table(&square, &[("s0", &[("s0", 0.6875), ("s1", 0.3125)]), ("s1", &[("s0", 0.625), ("s1", 0.375)])]);

    let f = kernel_from(
        &["a0", "a1"],
        &["b0", "b1", "b2"],
        vec![("a0", vec![("b0", 0.5), ("b1", 0.25), ("b2", 0.25)]), ("a1", vec![("b1", 0.5), ("b2", 0.5)])],
    );
    let g = kernel_from(
        &["b0", "b1", "b2"],
        &["a0", "a1"],
        vec![
            ("b0", vec![("a0", 1.0)]),
            ("b1", vec![("a0", 0.5), ("a1", 0.5)]),
            ("b2", vec![("a0", 0.25), ("a1", 0.75)]),
        ],
    );
    let gf = kernel_compose(&g, &f).unwrap();
    let fg = kernel_compose(&f, &g).unwrap();
    let two_by_three = expect_table(&gf, &[("a0", &[("a0", 0.6875), ("a1", 0.3125)]), ("a1", &[("a0", 0.375), ("a1", 0.625)])])
        && expect_table(
            &fg,
            &[
                ("b0", &[("b0", 0.5), ("b1", 0.25), ("b2", 0.25)]),
                ("b1", &[("b0", 0.25), ("b1", 0.375), ("b2", 0.375)]),
                ("b2", &[("b0", 0.125), ("b1", 0.4375), ("b2", 0.4375)]),
            ],
        );

    let xyz = ["x", "y", "z"];
    let k = |shift: f64| {
        let rows = xyz
            .iter()
            .map(|&a| {
                let base = match a {
                    "x" => 0.1,
                    "y" => 0.3,
                    _ => 0.2,
                } + shift;
                (a, vec![("x", base), ("y", 0.5 - shift), ("z", 0.5 - base + shift)])
            })
            .collect();
        kernel_from(&xyz, &xyz, rows)
    };
    let (h, g3, f3) = (k(0.05), k(0.1), k(1.0 / 30.0));
    let left = kernel_compose(&h, &kernel_compose(&g3, &f3).unwrap()).unwrap();
    let right = kernel_compose(&kernel_compose(&h, &g3).unwrap(), &f3).unwrap();
    let mut worst = 0.0f64;
    for a in xyz {
        let (l, r) = (pmf_row(&left, a), pmf_row(&right, a));
        for b in l.keys().chain(r.keys()) {
            worst = worst.max((l.get(b).unwrap_or(&0.0) - r.get(b).unwrap_or(&0.0)).abs());
        }
    }
    verdict(
        two_state && two_by_three && worst <= 1e-12,
        format!("2-state exact {two_state}, 2x3 exact {two_by_three}, associativity max deviation {worst:.1e}"),
    )
}

fn codp_bin() -> &'static str {
    env!("CARGO_BIN_EXE_codp")
}

fn dsl() -> Verdict {
    let dir = fixture_dir();
    let mut notes = Vec::new();
    let mut pass = true;

    let mut files = codp_files(&dir);
    files.extend(codp_files(&dir.join("golden")).into_iter().map(|(n, t)| (format!("golden/{n}"), t)));
    let broken: Vec<&str> = files
        .iter()
        .filter(|(_, text)| {
            let Ok(ast) = parse(text) else { return true };
            let canonical = format(&ast);
            parse(&canonical).as_ref() != Ok(&ast) || parse(&canonical).map(|a| format(&a)).as_ref() != Ok(&canonical)
        })
        .map(|(n, _)| n.as_str())
        .collect();
    pass &= broken.is_empty();
    notes.push(format!("round-trip {}/{} fixtures", files.len() - broken.len(), files.len()));

    let mut sound = 0;
    for name in ["chain", "diamond_loop", "parallel"] {
        let ast = parse(&std::fs::read_to_string(dir.join(format!("{name}.codp"))).unwrap()).unwrap();
        let el = elaborate(&ast).unwrap();
        let (fun, res) = outer_ports(&ast);
        let dp = el.build(&Registry::new(), &Default::default(), None).unwrap();
        let want = diagram_relation(&ast, &fun, &res);
        if el.fun_ports == fun && el.res_ports == res && !want.is_empty() && Relation::of(&dp).pairs == want {
            sound += 1;
        } else {
            notes.push(format!("{name} unsound"));
            pass = false;
        }
    }
    notes.push(format!("elaboration sound on {sound}/3 finite fixtures"));

    let malformed = codp_files(&dir.join("malformed"));
    let mut wrong = Vec::new();
    for (name, _) in &malformed {
        let path = dir.join("malformed").join(format!("{name}.codp"));
        let want = if name.starts_with("syntax_") { 1 } else { 2 };
        let got = Command::new(codp_bin()).arg("check").arg(&path).output().unwrap().status.code();
        if got != Some(want) {
            wrong.push(format!("{name}: {got:?}"));
        }
    }
    let missing = Command::new(codp_bin()).args(["check", "no_such_file.codp"]).output().unwrap().status.code();
    if missing != Some(64) {
        wrong.push(format!("missing file: {missing:?}"));
    }
    pass &= wrong.is_empty() && malformed.len() >= 10;
    notes.push(format!("{} malformed fixtures + missing file, wrong exit codes {wrong:?}", malformed.len()));
    verdict(pass, notes.join("; "))
}

fn run_cli(dir: &Path, threads: Option<&str>) -> BTreeMap<String, Vec<u8>> {
    let _ = std::fs::remove_dir_all(dir);
    std::fs::create_dir_all(dir).unwrap();
    let d = dir.to_str().unwrap();
    let uav = fixture_dir().join("uav.codp").display().to_string();
    let (solve_json, solve_csv) = (format!("{d}/solve.json"), format!("{d}/solve.csv"));
    let sub = |s: &str| format!("{d}/{s}");
    let (sweep, dist, front) = (sub("sweep"), sub("dist"), sub("front"));
    let commands: Vec<Vec<&str>> = vec![
        vec!["uav", "sweep", "--tech", "LiPo,NiMH,LCO", "--grid", "0:2000:250", "--n", "40", "--seed", "7", "--format", "csv,json,svg", "--out", &sweep],
        vec!["uav", "distribution", "--tech", "NiMH", "--payload", "1300", "--n", "300", "--seed", "7", "--format", "csv,json,svg", "--out", &dist],
        vec!["uav", "front", "--grid", "0:2000:100", "--format", "csv,json,svg", "--out", &front],
        vec!["solve", &uav, "--param", "tech=LiPo", "--seed", "5", "--out", &solve_json],
        vec!["solve", &uav, "--param", "tech=LiPo", "--seed", "5", "--format", "csv", "--out", &solve_csv],
    ];
    for args in commands {
        let mut c = Command::new(codp_bin());
        c.args(&args).env_remove("CODP_THREADS");
        if let Some(t) = threads {
            c.env("CODP_THREADS", t);
        }
        let o = c.output().unwrap();
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for e in std::fs::read_dir(&p).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let key = path.strip_prefix(dir).unwrap().display().to_string();
                out.insert(key, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Verdict {
    let base: PathBuf = std::env::temp_dir().join(format!("codp-acceptance-{}", std::process::id()));
    let settings = [None, None, None, Some("1"), Some("2"), Some("3")];
    let runs: Vec<BTreeMap<String, Vec<u8>>> =
        settings.iter().enumerate().map(|(i, t)| run_cli(&base.join(format!("run{i}")), *t)).collect();
    let _ = std::fs::remove_dir_all(&base);
    let numeric = runs[0].keys().filter(|k| k.ends_with(".csv") || k.ends_with(".json")).count();
    let differing: Vec<String> = runs[1..]
        .iter()
        .zip(&settings[1..])
        .filter(|(r, _)| **r != runs[0])
        .map(|(_, t)| format!("CODP_THREADS={t:?}"))
        .collect();
    verdict(
        differing.is_empty() && numeric >= 9,
        format!(
            "{} runs (CODP_THREADS unset x3, 1, 2, 3), {} files ({numeric} CSV/JSON), differing runs {differing:?}",
            runs.len(),
            runs[0].len()
        ),
    )
}

type Criterion = (u32, &'static str, Option<Duration>, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "composition oracle", Some(Duration::from_secs(60)), composition_oracle),
        (2, "interval lifting", None, interval_lifting),
        (3, "delta coherence", None, delta_coherence),
        (4, "distributional lift", None, distributional_lift),
        (5, "trace fixed point", Some(Duration::from_secs(1)), trace_fixed_point),
        (6, "UAV deterministic study", Some(Duration::from_secs(30)), deterministic_study),
        (7, "UAV uncertain study", Some(Duration::from_secs(600)), uncertain_study),
        (8, "kernel algebra", None, kernel_algebra),
        (9, "DSL", None, dsl),
        (10, "determinism", None, determinism),
    ];
    let only: BTreeSet<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        let in_time = limit.is_none_or(|l| took <= l);
        let pass = v.pass && in_time;
        let budget = limit.map(|l| format!(" of {}s", l.as_secs())).unwrap_or_default();
        println!(
            "criterion {n:>2} {name}: {} ({}; {:.2}s{budget})",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64()
        );
        failed += usize::from(!pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
