use std::process::{Command, Output};

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    subcommand: String,
    family: Option<String>,
    params: Value,
    policy: Value,
    seed: Option<u64>,
    version: String,
    threads: usize,
    wall_time_s: f64,
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expfunc")).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expfunc")).args(args).env(key, val).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn csv_body(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    assert!(text.starts_with("# manifest {"));
    text.lines().skip(1).collect::<Vec<_>>().join("\n")
}

#[test]
fn wgamma_of_identity_at_five_is_twenty_four() {
    let out = run(&["wgamma", "--family", "affine", "--params", r#"{"q":0}"#, "--z", "5+0i"]);
    let v = json(&out);
    assert!((f(&v["value_re"]) - 24.0).abs() < 1e-12);
    assert_eq!(f(&v["value"]["im"]), 0.0);
    assert_eq!(v["route"], "closed");
    let raw = String::from_utf8(out.stdout).unwrap();
    assert!(raw.contains("\"value_re\":2.40000000000000"), "17 significant digits: {raw}");
}

#[test]
fn generic_route_and_negative_imaginary_parts() {
    let v = json(&run(&["wgamma", "--family", "affine", "--params", r#"{"q":1}"#, "--z", "2-3i", "--route", "generic"]));
    // Γ(3 − 3i)/Γ(2)
    let (re, im) = (f(&v["value"]["re"]), f(&v["value"]["im"]));
    assert!((re - -0.440113407637002).abs() < 1e-10 && (im - 0.063637243126317).abs() < 1e-10, "{re} {im}");
}

#[test]
fn manifest_round_trips() {
    let v = json(&run(&["model", "--family", "brownian", "--params", r#"{"q":1,"sigma2":2,"mu":0}"#]));
    let m: Manifest = serde_json::from_value(v["manifest"].clone()).expect("manifest parses");
    assert_eq!(m.subcommand, "model");
    assert_eq!(m.family.as_deref(), Some("brownian"));
    assert_eq!(serde_json::to_value(&m).unwrap(), v["manifest"]);
    assert_eq!(v["strips"]["a_plus"], "inf");
    assert_eq!(f(&v["strips"]["u_plus"]), 1.0);
    assert_eq!(v["npsi"], "inf");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["nonsense"]).status.code(), Some(64));
    assert_eq!(run(&["wgamma", "--family", "affine", "--params", "{oops", "--z", "1"]).status.code(), Some(64));
    assert_eq!(run(&["wgamma", "--family", "affine", "--params", r#"{"q":0}"#, "--z", "1+"]).status.code(), Some(64));
    assert_eq!(run(&["wgamma", "--family", "affine", "--params", r#"{"q":-1}"#, "--z", "1"]).status.code(), Some(2));
    assert_eq!(run(&["wgamma", "--family", "nope", "--z", "1"]).status.code(), Some(2));
    let gate = run(&["density", "--family", "killed-drift", "--params", r#"{"q":2.5}"#, "--x", "0.5", "--deriv", "2"]);
    assert_eq!(gate.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&gate.stderr).contains("smoothness"));
    let horizon = run(&["simulate", "--family", "dufresne", "--params", r#"{"mu":0.05}"#, "--n", "20", "--dt", "0.1", "--t-max", "0.5"]);
    assert_eq!(horizon.status.code(), Some(3));
    assert_eq!(run(&["catalog", "--out", "csv"]).status.code(), Some(64));
}

#[test]
fn csv_bodies_are_byte_stable() {
    let args = ["density", "--family", "killed-drift", "--params", r#"{"q":2.5}"#, "--x-grid", "0.1:0.9:5", "--out", "csv"];
    let a = csv_body(&run(&args));
    let b = csv_body(&run(&args));
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("x,f,est_error,method"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let (x, fx): (f64, f64) = (cols[0].parse().unwrap(), cols[1].parse().unwrap());
        assert!((fx - 2.5 * (1.0 - x).powf(1.5)).abs() < 1e-7, "{line}");
    }
}

#[test]
fn simulation_is_reproducible_from_the_seed() {
    let args = ["simulate", "--family", "killed-drift", "--params", r#"{"q":2.5}"#, "--n", "300", "--dt", "1e-2", "--out", "csv"];
    let a = csv_body(&run(&args));
    assert_eq!(a, csv_body(&run(&args)));
    let mut other = args.to_vec();
    other.extend(["--seed", "7"]);
    assert_ne!(a, csv_body(&run(&other)));
    assert_eq!(a.lines().count(), 301);
}

#[test]
fn simulation_summary_with_reference() {
    let v = json(&run(&[
        "simulate", "--family", "killed-drift", "--params", r#"{"q":2.5}"#, "--n", "4000", "--method", "factorized",
        "--reference",
    ]));
    assert!((f(&v["mean"]) - 1.0 / 3.5).abs() < 4.0 * f(&v["se"]));
    assert!(f(&v["ks_vs_reference"]) < 0.03);
    assert_eq!(v["manifest"]["seed"], 42);
}

#[test]
fn catalog_lists_both_registries() {
    let v = json(&run(&["catalog"]));
    let ids = |k: &str| v[k].as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap().to_string()).collect::<Vec<_>>();
    assert!(ids("bernstein").contains(&"affine".to_string()));
    assert!(ids("levy").contains(&"hyper-exponential".to_string()));
}

#[test]
fn reproduce_appendix_writes_tables() {
    let dir = std::env::temp_dir().join(format!("expfunc-tables-{}", std::process::id()));
    let v = json(&run(&["reproduce-appendix", "--out", dir.to_str().unwrap()]));
    assert_eq!(v["rows"], 21);
    let csv = std::fs::read_to_string(dir.join("strip_table.csv")).unwrap();
    assert_eq!(csv.lines().count(), 23);
    let table: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("strip_table.json")).unwrap()).unwrap();
    let first = &table["table"][0];
    assert_eq!(first["family"], "brownian");
    assert_eq!(f(&first["strips"]["u_plus"]), 1.0);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn moments_report_statuses() {
    let v = json(&run(&["moments", "--family", "dufresne", "--params", r#"{"mu":2}"#, "--max-n", "3"]));
    let rows = v["moments"].as_array().unwrap();
    assert_eq!(rows[1]["positive"]["status"], "finite");
    assert!((f(&rows[1]["positive"]["value"]) - 0.5).abs() < 1e-12);
    assert_eq!(rows[2]["positive"]["status"], "infinite");
    assert!((f(&rows[3]["negative"]["value"]) - 192.0).abs() < 1e-9);
}

#[test]
fn tail_compare_and_thread_cap() {
    let out = run_env(
        &["tail", "--family", "brownian", "--params", r#"{"q":1,"sigma2":2}"#, "--x", "1e3", "--law", "cramer", "--compare"],
        "EXPFUNC_THREADS",
        "2",
    );
    let v = json(&out);
    assert!((f(&v["ratio"]) - 1.0).abs() < 0.02);
    assert_eq!(v["manifest"]["threads"], 2);
    assert_eq!(run_env(&["catalog"], "EXPFUNC_THREADS", "zero").status.code(), Some(64));
}
