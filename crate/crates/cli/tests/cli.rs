use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use codp_testkit::fixture_dir;

fn codp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codp")).args(args).output().expect("run codp")
}

fn fixture(name: &str) -> String {
    fixture_dir().join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("codp-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn json(o: &Output) -> serde_json::Value {
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn check_exit_codes() {
    assert_eq!(codp(&["check", &fixture("uav.codp")]).status.code(), Some(0));
    assert_eq!(codp(&["check", &fixture("malformed/type_fan_in.codp")]).status.code(), Some(2));
    assert_eq!(codp(&["check", &fixture("malformed/syntax_missing_arrow.codp")]).status.code(), Some(1));
    assert_eq!(codp(&["check", &fixture("no_such_file.codp")]).status.code(), Some(64));
    assert_eq!(codp(&["check"]).status.code(), Some(64));
    assert_eq!(codp(&["--help"]).status.code(), Some(0));
}

#[test]
fn fmt_prints_the_canonical_form() {
    let o = codp(&["fmt", &fixture("diamond_loop.codp")]);
    let golden = std::fs::read_to_string(fixture_dir().join("golden/diamond_loop.codp")).unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), golden);
}

#[test]
fn deterministic_uav_at_500_grams_is_feasible() {
    let v = json(&codp(&["solve", &fixture("uav_det.codp"), "--param", "tech=LCO"]));
    let r = &v["results"][0];
    assert_eq!(r["feasible"], true);
    assert!(!r["minimal_resources"].as_array().unwrap().is_empty());
    assert_eq!(r["witnesses"][0], serde_json::json!(["a1", "LCO"]));
    assert_eq!(v["res_ports"], serde_json::json!(["airframe.self_weight", "airframe.total_cost"]));
}

#[test]
fn infeasible_payload_is_an_empty_front() {
    let args = [
        "solve",
        &fixture("uav_det.codp"),
        "--param",
        "tech=LCO",
        "--query",
        "airframe.payload=5000",
        "--query",
        "task.distance=1200",
        "--query",
        "task.missions=1000",
    ];
    let v = json(&codp(&args));
    assert_eq!(v["results"][0]["feasible"], false);
    assert_eq!(v["results"][0]["minimal_resources"], serde_json::json!([]));
}

#[test]
fn solve_is_byte_identical_across_runs() {
    let args = ["solve", &fixture("uav.codp"), "--param", "tech=NiMH", "--seed", "11", "--format", "csv"];
    let a = codp(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, codp(&args).stdout);
}

#[test]
fn solve_usage_errors() {
    let uav = fixture("uav.codp");
    assert_eq!(codp(&["solve", &uav, "--param", "tech=LiPo"]).status.code(), Some(64));
    assert_eq!(codp(&["solve", &uav, "--param", "tech=Unobtainium", "--seed", "1"]).status.code(), Some(64));
    assert_eq!(codp(&["solve", &uav, "--param", "bogus=1", "--seed", "1"]).status.code(), Some(64));
    let partial = ["solve", &uav, "--param", "tech=LiPo", "--seed", "1", "--query", "airframe.payload=10"];
    assert_eq!(codp(&partial).status.code(), Some(2));
}

#[test]
fn finite_diagrams_solve_without_a_registry() {
    let v = json(&codp(&["solve", &fixture("chain.codp"), "--query", "a.x=lo"]));
    assert_eq!(v["results"][0]["feasible"], true);
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn distribution_matches_the_regression_fixture() {
    let out = scratch("dist");
    let o = codp(&[
        "uav", "distribution", "--tech", "NiMH", "--payload", "1300", "--n", "1000", "--seed", "7", "--format", "csv,json",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    assert_eq!(read(&out, "histogram.csv"), read(&golden, "histogram.csv"));
    assert_eq!(read(&out, "summary.json"), read(&golden, "summary.json"));
    assert_eq!(read(&out, "records.csv").lines().count(), 1001);
}

#[test]
fn one_draw_is_one_record() {
    let o = codp(&["uav", "distribution", "--tech", "NiMH", "--payload", "1300", "--n", "1", "--seed", "7", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["summary"]["n"], 1);
    let o = codp(&["uav", "sweep", "--tech", "LiPo", "--grid", "500", "--n", "1", "--seed", "7"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
}

#[test]
fn sampling_needs_a_seed_and_sane_flags() {
    let base = ["uav", "distribution", "--tech", "NiMH", "--payload", "1300"];
    assert_eq!(codp(&base).status.code(), Some(64));
    let with = |extra: &[&str]| {
        let mut a = base.to_vec();
        a.extend_from_slice(&["--seed", "1"]);
        a.extend_from_slice(extra);
        codp(&a).status.code()
    };
    assert_eq!(with(&["--n", "0"]), Some(64));
    assert_eq!(with(&["--tech", "Unobtainium"]), Some(64));
    assert_eq!(with(&["--format", "csv,json"]), Some(64));
    assert_eq!(codp(&["uav", "sweep", "--n", "2"]).status.code(), Some(64));
    assert_eq!(codp(&["uav", "front", "--grid", "0:10"]).status.code(), Some(64));
    let bad = Command::new(env!("CARGO_BIN_EXE_codp")).env("CODP_THREADS", "zero").args(["uav", "front"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(64));
}

#[test]
fn plots_do_not_change_numeric_outputs() {
    let (a, b) = (scratch("plain"), scratch("plots"));
    let run = |dir: &Path, formats: &str| {
        let o = codp(&[
            "uav", "sweep", "--tech", "LiPo,LCO", "--grid", "0:2000:500", "--n", "10", "--seed", "3", "--format", formats,
            "--out", dir.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run(&a, "csv,json");
    run(&b, "csv,json,svg");
    for f in ["records.csv", "summary.csv", "summary.json"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
    let svg = read(&b, "quantiles.svg");
    assert!(svg.starts_with("<svg") && svg.contains("<polygon") && !svg.contains("NaN"));
    assert!(!a.join("quantiles.svg").exists());
}

#[test]
fn front_outputs() {
    let out = scratch("front");
    let o = codp(&["uav", "front", "--grid", "0:2000:250", "--format", "csv,json,svg", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read(&out, "front.csv");
    assert_eq!(csv.lines().count(), 10);
    assert!(csv.starts_with("payload_g,feasible,min_cost_usd,self_weight_g,tech,witness\n"));
    let v: serde_json::Value = serde_json::from_str(&read(&out, "front.json")).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 9);
    assert!(read(&out, "front.svg").contains("<circle"));
}
