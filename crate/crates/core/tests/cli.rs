use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use opmetric::ball::{BallAutomorphism, BallPoint};
use opmetric::chk::ClosedOperator;
use opmetric::dynamics::HBiholomorphicMap;
use opmetric::io;
use opmetric::linalg::C64;
use opmetric::oracles::Sampler;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opmetric")).args(args).output().expect("spawn opmetric")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad stdout ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn write_op(dir: &Path, name: &str, t: &ClosedOperator) -> String {
    let path: PathBuf = dir.join(name);
    io::write_operator_file(&path, t).unwrap();
    path.display().to_string()
}

fn scalar(x: f64) -> ClosedOperator {
    ClosedOperator::scalar(C64::new(x, 0.0))
}

#[test]
fn dist_reference_value() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.json", r#"{"rows":1,"cols":1,"dimH":1,"dimK":1,"data":[[1,0]]}"#);
    let zero = write(dir.path(), "zero.json", r#"{"rows":1,"cols":1,"dimH":1,"dimK":1,"data":[[0,0]]}"#);
    let out = run(&["dist", &one, &zero]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("\"value\": 0.88137358701954294"), "{text}");
    let v = json(&out)["value"].as_f64().unwrap();
    assert!((v - 0.88137358701954294).abs() <= 1e-10);

    let same = run(&["dist", &one, &one]);
    assert_eq!(json(&same)["value"].as_f64(), Some(0.0));
}

#[test]
fn operator_commands_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Sampler::new(3);
    let (a, b) = (s.operator(3, 2, 0.9).unwrap(), s.operator(3, 2, 0.9).unwrap());
    let (pa, pb) = (write_op(dir.path(), "a.json", &a), write_op(dir.path(), "b.json", &b));
    let q = dir.path().join("q.json").display().to_string();

    let out = run(&["midpoint", &pa, &pb, "-o", &q]);
    assert_eq!(out.status.code(), Some(0));
    let mid = io::parse_operator_file(&q).unwrap();
    assert_eq!(mid, opmetric::chk::midpoint(&a, &b).unwrap());

    let out = run(&["geodesic", &pa, &pb, "--t", "0.25", "-o", &q]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(io::parse_operator_file(&q).unwrap(), opmetric::chk::geodesic_point(&a, &b, 0.25).unwrap());

    let out = run(&["barycenter", &pa, &pb, &pa, "-o", &q]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["center", &pa, &pb, "--tol", "1e-9", "-o", &q]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["converged"], Value::Bool(true));
    let half = opmetric::chk::distance(&a, &b).unwrap() / 2.0;
    assert!((doc["value"].as_f64().unwrap() - half).abs() <= 1e-6);
}

#[test]
fn operator_inlined_without_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (write_op(dir.path(), "a.json", &scalar(1.0)), write_op(dir.path(), "b.json", &scalar(-1.0)));
    let doc = json(&run(&["midpoint", &pa, &pb]));
    assert_eq!(doc["operator"]["rows"], Value::from(1));
    assert!(doc["operator"]["data"][0][0].as_f64().unwrap().abs() < 1e-15);
}

#[test]
fn fixed_point_and_orbit_commands() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Sampler::new(12);
    let gens = s.finite_rotation_generators(2, 1).unwrap();
    let paths: Vec<String> = gens
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let p = dir.path().join(format!("g{k}.json"));
            io::write_generator_file(&p, g).unwrap();
            p.display().to_string()
        })
        .collect();
    let start = write_op(dir.path(), "t0.json", &s.operator(2, 1, 0.8).unwrap());
    let out_path = dir.path().join("p.json").display().to_string();

    let out = run(&["fixed-point", "--gen", &paths[0], &paths[1], "--start", &start, "--tol", "1e-7", "-o", &out_path]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert!(doc["value"].as_f64().unwrap() <= 1e-7);
    assert_eq!(doc["orbit_bounded"], Value::Bool(true));

    let out = run(&["orbit", "--gen", &paths[0], "--gen", &paths[1], "--start", &start, "--depth", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["diameter_by_depth"].as_array().unwrap().len(), 5);
    assert_eq!(doc["bounded"], Value::Bool(true));
}

#[test]
fn translation_fixed_point_does_not_converge() {
    let dir = tempfile::tempdir().unwrap();
    let g = HBiholomorphicMap::new(BallAutomorphism::translation(BallPoint::scalar(C64::new(0.5, 0.0)).unwrap()).unwrap());
    let gen = dir.path().join("g.json");
    io::write_generator_file(&gen, &g).unwrap();
    let start = write_op(dir.path(), "t0.json", &scalar(0.0));
    let out = run(&["fixed-point", "--gen", gen.to_str().unwrap(), "--start", &start, "--max-iter", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["orbit_bounded"], Value::Bool(false));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unbounded"));
}

#[test]
fn input_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_op(dir.path(), "good.json", &scalar(1.0));
    let short = write(dir.path(), "short.json", r#"{"rows":1,"cols":2,"data":[[1,0]]}"#);
    let nan = write(dir.path(), "nan.json", "{\"rows\":1,\"cols\":1,\n\"data\":[[NaN,0]]}");
    let broken = write(dir.path(), "broken.json", "{\"rows\":1,");
    let wide = write_op(dir.path(), "wide.json", &ClosedOperator::zero(2, 1));
    for args in [
        vec!["dist", &good, &short],
        vec!["dist", &good, &nan],
        vec!["dist", &good, &broken],
        vec!["dist", &good, &wide],
        vec!["dist", &good, "/nonexistent/file.json"],
        vec!["dist", &good],
        vec!["geodesic", &good, &good, "--t", "2"],
        vec!["check", "--suite", "nope"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    let err = String::from_utf8_lossy(&run(&["dist", &good, &nan]).stderr).to_string();
    assert!(err.contains("line 2") && err.contains("non-finite"), "{err}");
}

#[test]
fn numerical_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // hat of this operator is within 1e-8 of the unit sphere
    let huge = write_op(dir.path(), "huge.json", &scalar(1e9));
    let zero = write_op(dir.path(), "zero.json", &scalar(0.0));
    let out = run(&["dist", &huge, &zero]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn check_single_suite() {
    let out = run(&["check", "--suite", "ball", "--samples", "5", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["passed"], Value::Bool(true));
    assert!(doc["properties"].as_array().unwrap().iter().all(|p| p["suite"] == "ball"));
}

#[test]
fn help_exits_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
