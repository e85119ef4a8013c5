use std::path::PathBuf;

use kregular::cli::{exit_code, main_with_args};
use kregular::{corpus, io, Error};
use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kreg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_corpus(name: &str) -> String {
    let path = scratch(&format!("{name}.json"));
    std::fs::write(&path, io::to_json(&corpus::by_name(name).unwrap())).unwrap();
    path.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String) {
    main_with_args(std::iter::once("kreg").chain(args.iter().copied()))
}

fn json(out: &str) -> Value {
    serde_json::from_str(out).unwrap_or_else(|e| panic!("{e}: {out}"))
}

#[test]
fn eval_example_b() {
    let file = write_corpus("example_b");
    let (code, out) = run(&["eval", &file, "--n", "7"]);
    assert_eq!(code, 0, "{out}");
    let v = json(&out);
    assert_eq!(v["value"], 1);
    assert_eq!(v["mode"], "rational");
}

#[test]
fn eval_range_as_csv() {
    let file = write_corpus("stern");
    let (code, out) = run(&["eval", &file, "--n", "0", "--to", "8", "--format", "csv"]);
    assert_eq!(code, 0, "{out}");
    let values: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(values, ["0", "1", "1", "2", "1", "3", "2", "3", "1"]);
}

#[test]
fn lebesgue_cdf_is_identity() {
    let file = write_corpus("trivial");
    let (code, out) = run(&["measure", &file, "--kind", "cdf", "--depth", "3", "--format", "csv"]);
    assert_eq!(code, 0, "{out}");
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let x: f64 = rec[0].parse().unwrap();
        let f: f64 = rec[1].parse().unwrap();
        assert!((x - f).abs() < 1e-12, "F({x}) = {f}");
        rows += 1;
    }
    assert_eq!(rows, 9);
}

#[test]
fn construct_delta_then_pointmass() {
    let path = scratch("delta.json");
    let file = path.to_string_lossy().into_owned();
    let (code, out) = run(&["construct-delta", "2/3", "2", "-o", &file]);
    assert_eq!(code, 0, "{out}");
    let (code, out) = run(&["pointmass", &file, "2/3"]);
    assert_eq!(code, 0, "{out}");
    let mass = json(&out)["value"].as_f64().unwrap();
    assert!((mass - 1.0).abs() < 1e-9);
    let (code, out) = run(&["pointmass", &file, "1/3"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(json(&out)["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn graph_formats() {
    let file = write_corpus("point_mass_two_thirds");
    let (code, out) = run(&["graph", &file]);
    assert_eq!(code, 0);
    assert!(out.starts_with("digraph"), "{out}");
    let (code, out) = run(&["graph", &file, "--format", "json"]);
    assert_eq!(code, 0);
    assert!(json(&out).get("scc").is_some(), "{out}");
}

#[test]
fn verify_passes_on_corpus() {
    for name in ["example_a", "zaremba_reduced", "mixed_two_cycle"] {
        let file = write_corpus(name);
        let (code, out) = run(&["verify", &file, "--max-n", "8"]);
        assert_eq!(code, 0, "{name}: {out}");
        assert_eq!(json(&out)["mismatches"], 0);
    }
}

#[test]
fn precondition_exit_code() {
    let file = write_corpus("degenerate");
    let (code, out) = run(&["measure", &file, "--kind", "approximant", "--n", "2"]);
    assert_eq!(code, 2, "{out}");
    assert!(json(&out)["error"]["kind"].is_string());
}

#[test]
fn parse_exit_code() {
    let path = scratch("broken.json");
    std::fs::write(&path, "{\"k\": 2, \"d\": 1,\n \"u\": [\"x\"], \"v\": [1], \"mats\": [[[1]], [[1]]]}").unwrap();
    let (code, out) = run(&["eval", &path.to_string_lossy(), "--n", "3"]);
    assert_eq!(code, 4, "{out}");
    let err = &json(&out)["error"];
    assert_eq!(err["kind"], "parse");
    assert_eq!(err["line"], 2);
    let (code, _) = run(&["eval"]);
    assert_eq!(code, 4);
    let (code, _) = run(&["construct-delta", "two-thirds", "2"]);
    assert_eq!(code, 4);
}

#[test]
fn mismatch_maps_to_three() {
    assert_eq!(exit_code(&Error::Mismatch("closed form disagrees".into())), 3);
    assert_eq!(exit_code(&Error::Precondition("x".into())), 2);
}

#[test]
fn binary_reports_status_and_streams() {
    let file = write_corpus("trivial");
    let ok = std::process::Command::new(env!("CARGO_BIN_EXE_kreg")).args(["sum", &file, "--n", "4"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&String::from_utf8_lossy(&ok.stdout))["closed"], 16);
    let bad = std::process::Command::new(env!("CARGO_BIN_EXE_kreg"))
        .args(["sum", "/nonexistent.json", "--n", "1"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(bad.stdout.is_empty());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error"));
}
