use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn udw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udw")).args(args).output().expect("failed to spawn udw")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(args: &[&str]) -> Vec<Value> {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = udw(&all);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    serde_json::from_slice::<Vec<Value>>(&o.stdout).unwrap()
}

const QUADRATIC_M: [&str; 14] = [
    "element",
    "--coupling",
    "quadratic",
    "--term",
    "m",
    "--alpha",
    "1",
    "--beta",
    "4",
    "--delta",
    "1",
    "--gamma",
    "0",
    "--eta",
];

#[test]
fn quadratic_nonlocal_element() {
    let mut args = QUADRATIC_M.to_vec();
    args.push("1e-4");
    let o = udw(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    let row: Vec<_> = lines.next().unwrap().split(',').collect();
    let abs: f64 = row[header.iter().position(|c| *c == "abs").unwrap()].parse().unwrap();
    assert!(abs.is_finite() && abs > 0.0);
    assert!(lines.next().is_none());
}

#[test]
fn missing_cutoff_is_a_contract_error() {
    let mut args = QUADRATIC_M.to_vec();
    args.push("0");
    let o = udw(&args);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("CutoffRequired"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn negative_width_is_a_usage_error() {
    let o = udw(&["element", "--delta", "-1"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("delta"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(udw(&["element", "--bogus", "1"]).status.code(), Some(64));
    assert_eq!(udw(&["element", "--coupling", "cubic"]).status.code(), Some(64));
}

#[test]
fn help_succeeds() {
    let o = udw(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("fit-divergence"));
    assert!(!stdout(&o).contains("regen-oracle-tables"));
}

#[test]
fn nonsimultaneous_nonlocal_term_is_refused() {
    let o = udw(&["element", "--term", "m", "--gamma-a", "0", "--gamma-b", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("NonSimultaneous"));
}

#[test]
fn too_few_cutoffs() {
    let o = udw(&["sweep", "--etas", "1e-1,1e-2,1e-3"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("≥ 4 etas required"), "{}", stderr(&o));
}

#[test]
fn sweep_rows_follow_the_cutoffs() {
    let rows = json(&["sweep", "--term", "lab", "--gamma-b", "4", "--etas", "1e-1,1e-2,1e-3,1e-4"]);
    let etas: Vec<f64> = rows.iter().map(|r| r["eta"].as_f64().unwrap()).collect();
    assert_eq!(etas, [1e-1, 1e-2, 1e-3, 1e-4]);
    assert!(rows.iter().all(|r| r["status"] == "ok"));
}

fn verdict(coupling: &str) -> Value {
    let rows = json(&[
        "fit-divergence",
        "--coupling",
        coupling,
        "--term",
        "m",
        "--alpha",
        "1",
        "--beta",
        "4",
        "--delta",
        "1",
        "--gamma",
        "0",
        "--etas",
        "1e-2,1e-3,1e-4,1e-5,1e-6,1e-7",
    ]);
    rows.into_iter().next().unwrap()
}

#[test]
fn quadratic_nonlocal_term_diverges() {
    let v = verdict("quadratic");
    assert_eq!(v["verdict"], "LogDivergent");
    assert!(v["slope"].as_f64().unwrap() > 0.0);
    assert!(v["planck_extrapolation"].as_f64().unwrap() > 0.0);
}

#[test]
fn linear_nonlocal_term_converges() {
    let v = verdict("linear");
    assert_eq!(v["verdict"], "Convergent");
    assert!(v["planck_extrapolation"].is_null());
}

#[test]
fn gamma_sets_both_centres_unless_overridden() {
    let a = json(&["element", "--term", "lab", "--gamma", "2"]);
    assert_eq!(a, json(&["element", "--term", "lab", "--gamma-a", "2", "--gamma-b", "2"]));
    let b = json(&["element", "--term", "lab", "--gamma", "2", "--gamma-b", "3"]);
    assert_eq!((b[0]["gamma_a"].as_f64(), b[0]["gamma_b"].as_f64()), (Some(2.0), Some(3.0)));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "term = \"lab\"\nalpha = 2.0\ngamma-b = 4.0\neta = 0.05\n");
    let from_file = json(&["element", "--config", &cfg]);
    assert_eq!(from_file, json(&["element", "--term", "lab", "--alpha", "2", "--gamma-b", "4", "--eta", "0.05"]));
    let overridden = json(&["element", "--config", &cfg, "--alpha", "3"]);
    assert_eq!(overridden, json(&["element", "--term", "lab", "--alpha", "3", "--gamma-b", "4", "--eta", "0.05"]));
}

#[test]
fn config_errors_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "alpah = 1.0\n");
    let o = udw(&["element", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("alpah"), "{}", stderr(&o));
    let missing = dir.path().join("absent.toml");
    assert_eq!(udw(&["element", "--config", missing.to_str().unwrap()]).status.code(), Some(64));
}

#[test]
fn figure_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = udw(&["figure", "fig4", "--grid", "6", "--threads", threads, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let first = run("a.csv", "1");
    assert_eq!(first, run("b.csv", "1"));
    assert_eq!(first, run("c.csv", "3"));
    let text = String::from_utf8(first).unwrap();
    // 2 couplings × 2 gaps × 6 cutoffs × 6 separations, plus the header.
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 6 * 6);
}

#[test]
fn figure_marks_the_light_cone() {
    let rows = json(&["figure", "fig5", "--grid", "7"]);
    assert_eq!(rows.len(), 2 * 7 * 7);
    for r in &rows {
        let (beta, dgamma) = (r["beta"].as_f64().unwrap(), r["delta_gamma"].as_f64().unwrap());
        let want = if beta == dgamma {
            "lightcone"
        } else if beta > dgamma {
            "spacelike"
        } else {
            "timelike"
        };
        assert_eq!(r["region"], want, "β = {beta}, Δγ = {dgamma}");
    }
}

#[test]
fn csv_numbers_have_seventeen_significant_digits() {
    let o = udw(&["element", "--eta", "0.1"]);
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    for field in row.split(',').skip(2).take(12) {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{field}");
    }
}
