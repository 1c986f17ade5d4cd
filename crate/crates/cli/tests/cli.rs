use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tiling_core::complex::{generate_theorem, octahedral_subdivide, MarkedComplex};
use tiling_core::excise::{can_excise, GroupSpec};
use tiling_core::realize::{check_theorem, SearchOptions};
use tiling_core::trimat::IncidenceMatrix;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fx(rel: &str) -> String {
    fixtures().join(rel).display().to_string()
}

fn tiling(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiling")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn load<T: serde::de::DeserializeOwned>(rel: &str) -> T {
    serde_json::from_str(&std::fs::read_to_string(fixtures().join(rel)).unwrap()).unwrap()
}

#[test]
fn fano_over_f2_exits_one_with_a_counterexample() {
    let out = tiling(&["check", &fx("matrices/fano.json"), "--q", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["verdict"], "counterexample");
    assert!(r["result"]["verdict"]["counterexample"]["points"].is_array());
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn check_matches_the_library() {
    let m: IncidenceMatrix = load("matrices/warmup.json");
    let lib = check_theorem(&m, 3, &SearchOptions::default()).unwrap();
    let out = tiling(&["check", &fx("matrices/warmup.json"), "--q", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["verdict"]["outcome"], lib.outcome.name());
}

#[test]
fn propagate_reproduces_case_one() {
    let out = tiling(&["propagate", &fx("matrices/pappus12x9.json"), "--seed", "10,4,-1", "--sweeps", "fix", "--matrix-only"]);
    assert_eq!(out.status.code(), Some(0));
    let got: IncidenceMatrix = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(got, load::<IncidenceMatrix>("matrices/pappus12x9-case1.json"));
}

#[test]
fn propagate_reports_seed_conflicts() {
    // (2,1) is +1 in the 9x9 matrix.
    let out = tiling(&["propagate", &fx("matrices/pappus9x9.json"), "--seed", "2,1,-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["verdict"], "seedConflict");
}

#[test]
fn ninegon_over_f4_is_not_excisable_and_realizes() {
    let out = tiling(&["excise", &fx("complexes/ninegon-grope.json"), "--face", "marked", "--group", "F4", "--realize", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["result"]["failingCochain"]["modulus"], 3);
    assert_eq!(r["result"]["counterexample"]["q"], 4);
}

#[test]
fn excise_matches_the_library() {
    let mc: MarkedComplex = load("complexes/nongrope.json");
    for g in ["R*", "F5*", "Z/3", "C*"] {
        let lib = can_excise(&mc.complex, mc.marked, &g.parse::<GroupSpec>().unwrap()).unwrap();
        let out = tiling(&["excise", &fx("complexes/nongrope.json"), "--face", "3", "--group", g]);
        assert_eq!(out.status.code(), Some(if lib { 0 } else { 1 }), "{g}");
        assert_eq!(report(&out)["result"]["excisable"], lib);
    }
}

#[test]
fn generate_and_validate() {
    let mc: MarkedComplex = load("complexes/tetrahedron.json");
    let out = tiling(&["generate", &fx("complexes/tetrahedron.json"), "--matrix-only"]);
    let got: IncidenceMatrix = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(got, generate_theorem(&mc).unwrap());
    let out = tiling(&["validate", &fx("complexes/tetrahedron.json"), "--matrix", &fx("matrices/desargues.json"), "--group", "C*"]);
    assert_eq!(out.status.code(), Some(0));
    let out = tiling(&["validate", &fx("complexes/tetrahedron.json"), "--matrix", &fx("matrices/pappus9x9.json"), "--group", "C*"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn subdivide_matches_the_library() {
    let mc: MarkedComplex = load("complexes/one-line-sphere.json");
    let out = tiling(&["subdivide", &fx("complexes/one-line-sphere.json")]);
    let got: MarkedComplex = serde_json::from_value(report(&out)["result"].clone()).unwrap();
    assert_eq!(got, octahedral_subdivide(&mc).unwrap());
}

#[test]
fn gropes() {
    let out = tiling(&["grope", "polygon", "--k", "3", "--group", "R*"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"], load::<Value>("complexes/ninegon-grope.json"));
    let out = tiling(&["grope", "polygon", "--k", "3", "--group", "F4*"]);
    assert_eq!(out.status.code(), Some(2));
    let a = tiling(&["grope", "random", "--seed", "5", "--group", "F8*", "--ks", "3,5"]);
    let b = tiling(&["grope", "random", "--seed", "5", "--group", "F8*", "--ks", "3,5"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(tiling(&["grope", "random"]).status.code(), Some(2));
}

#[test]
fn certificates() {
    for c in ["pappus", "desargues", "one-line", "ninegon"] {
        let out = tiling(&["prove-validate", &fx(&format!("certificates/{c}.json"))]);
        assert_eq!(out.status.code(), Some(0), "{c}");
    }
    let dir = std::env::temp_dir().join("tiling-cli-gap");
    std::fs::create_dir_all(&dir).unwrap();
    let mut cert: Value = load("certificates/pappus.json");
    cert["caseTree"]["split"]["minus"] = Value::Null;
    let path = dir.join("gap.json");
    std::fs::write(&path, cert.to_string()).unwrap();
    let out = tiling(&["prove-validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["verdict"], "coverageGap");
}

#[test]
fn quaternion_pappus() {
    let out = tiling(&["quat", "pappus", "--u", "i", "--v", "j"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["conclusionProduct"], "-1");
    assert_eq!(tiling(&["quat", "pappus", "--u", "i", "--v", "i"]).status.code(), Some(2));
}

#[test]
fn verify_the_six_gon_configuration() {
    let out = tiling(&["verify", &fx("matrices/6gon.json"), &fx("configs/6gon-f3.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["counterexample"], true);
}

#[test]
fn selftest_passes() {
    let out = tiling(&["selftest", "--fixtures", &fx("")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(tiling(&["check"]).status.code(), Some(2));
    assert_eq!(tiling(&["excise", &fx("complexes/nongrope.json"), "--face", "3", "--group", "F6"]).status.code(), Some(2));
    assert_eq!(tiling(&["propagate", &fx("matrices/pappus9x9.json"), "--seed", "0,1,1"]).status.code(), Some(2));
}
