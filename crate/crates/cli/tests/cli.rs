//! End-to-end tests of the `sheaflab` binary: documented examples, exit
//! codes, report determinism, and the tracked input fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn workspace(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(path)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sheaflab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON report")
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("sheaflab-test-{}-{name}", std::process::id()))
}

#[test]
fn stalk_query_matches_documented_example() {
    let sheaf = workspace("inputs/halfplane.json");
    let out = run(&["radon-stalk", "--sheaf", sheaf.to_str().unwrap(), "--nhat", "0,1", "--r", "0"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rep = report(&out);
    assert_eq!(rep["pass"], Value::Bool(true));
    assert_eq!(rep["payload"]["stalk"], serde_json::json!({ "1": 1 }));

    // The same line co-oriented downward misses the support's conormal.
    let out = run(&["radon-stalk", "--sheaf", sheaf.to_str().unwrap(), "--nhat", "0,-1", "--r", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["payload"]["stalk"], serde_json::json!({}));
}

#[test]
fn vacuous_contact_check_passes() {
    let out = run(&["contact-check", "--map", "chi", "--mode", "exact", "--samples", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["pass"], Value::Bool(true));
    let checks = rep["payload"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2, "n sweeps 2 and 3 when --n is omitted");
    assert!(checks.iter().all(|c| c["samples"] == 0 && c["pass"] == Value::Bool(true)));
}

#[test]
fn malformed_json_reports_position_and_exits_2() {
    let path = tmp("broken.json");
    std::fs::write(&path, "{ \"indicators\": [ { ] }").unwrap();
    let out = run(&["ss", "--sheaf", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1 column"), "position missing from: {err}");
    assert!(err.contains("broken.json"), "file name missing from: {err}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn missing_required_flags_exit_2() {
    let out = run(&["radon-stalk"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["euler-invert", "--random", "3", "--lines", "4", "--seed", "5"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn out_flag_duplicates_the_report() {
    let sheaf = workspace("inputs/square.json");
    let path = tmp("report.json");
    let out = run(&["ss", "--sheaf", sheaf.to_str().unwrap(), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let copy = std::fs::read(&path).unwrap();
    assert_eq!(copy, out.stdout, "--out writes exactly what was printed");
    std::fs::remove_file(&path).ok();
}

#[test]
fn failed_comparison_exits_1_and_reports_where() {
    // The triangle function is not the local Euler function of the square
    // sheaf, so decategorification disagrees with the stalkwise Euler
    // characteristic and the run must fail.
    let sheaf = workspace("inputs/square.json");
    let cfun = workspace("inputs/cfun-triangle.json");
    let out = run(&[
        "euler-radon",
        "--sheaf", sheaf.to_str().unwrap(),
        "--cfun", cfun.to_str().unwrap(),
        "--random", "20", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rep = report(&out);
    assert_eq!(rep["pass"], Value::Bool(false));
    assert!(rep["payload"]["mismatches"].as_u64().unwrap() > 0);
    assert!(rep["payload"]["firstMismatch"]["nhat"].is_string());

    // The matching pairing passes: the same sheaf against its own local
    // Euler function.
    let out = run(&[
        "euler-radon",
        "--sheaf", sheaf.to_str().unwrap(),
        "--random", "20", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["payload"]["mismatches"], 0);
}

#[test]
fn conormal_csv_dump_has_the_documented_header() {
    let knot = workspace("inputs/trefoil.json");
    let path = tmp("samples.csv");
    let out = run(&[
        "conormal", "--knot", knot.to_str().unwrap(),
        "--per-seg", "2", "--per-fiber", "4",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&path).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "qx,qy,qz,px,py,pz,nhatx,nhaty,nhatz,r,etax,etay,etaz,etar,\
         constraintResidual,routeResidual,legendrianResidual"
    );
    assert_eq!(csv.lines().count(), 1 + 12 * 2 * 4);
    std::fs::remove_file(&path).ok();
}

#[test]
fn projector_worked_examples_pass() {
    let out = run(&["project1d", "--random", "5", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    let checks = rep["payload"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    assert!(checks.iter().all(|c| c["pass"] == Value::Bool(true)));
    assert_eq!(rep["payload"]["failures"], 0);
}

#[test]
fn trefoil_fixture_matches_builtin() {
    let text = std::fs::read_to_string(workspace("inputs/trefoil.json")).unwrap();
    let parsed: Value = serde_json::from_str(&text).unwrap();
    let builtin = sheaflab::knot::trefoil12();
    let vertices = parsed["vertices"].as_array().unwrap();
    assert_eq!(vertices.len(), builtin.vertices().len());
    for (row, expect) in vertices.iter().zip(builtin.vertices()) {
        let row = row.as_array().unwrap();
        assert_eq!(row.len(), 3);
        for (value, expect) in row.iter().zip(expect) {
            // Bit-for-bit: the fixture is generated from the same model.
            assert_eq!(value.as_f64().unwrap(), *expect);
        }
    }
}

/// Regenerate `inputs/trefoil.json` from the builtin model.  Shortest
/// round-trip float formatting keeps the file value-identical to the
/// in-code vertices.
#[test]
#[ignore]
fn regen_trefoil_fixture() {
    let builtin = sheaflab::knot::trefoil12();
    let doc = serde_json::json!({
        "$schema": "../schemas/knot-v1.json",
        "vertices": builtin.vertices(),
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&doc).unwrap());
    std::fs::write(workspace("inputs/trefoil.json"), text).unwrap();
}
