use std::path::Path;
use std::process::{Command, Output};

use isoflow::curves::{Param, SampledCurve};
use isoflow::Potential;
use serde_json::Value;
use tempfile::TempDir;

fn isoflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoflow")).current_dir(dir).args(args).output().expect("binary runs")
}

fn status(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut rd = csv::Reader::from_path(path).unwrap();
    rd.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect()
}

const SEPARABLE: &str = r#"{"kind": "separable-double-well", "wells": [[-1, 0], [1, 0]], "params": {"transverse": 1.0}}"#;

#[test]
fn onewell_geodesic_and_curve_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = isoflow(dir.path(), &["onewell", "--lambda1", "1", "--lambda2", "1", "--p0", "1,0", "--area", "0", "--out", "c.csv", "--report", "r.json"]);
    assert_eq!(status(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("r.json"));
    let energy = report["energy"].as_f64().unwrap();
    assert!((energy - 0.5).abs() < 1e-6, "{energy}");
    // re-reading the CSV reproduces the functionals
    let curve = SampledCurve::read_csv_file(dir.path().join("c.csv"), Param::UniformT).unwrap();
    let pot = Potential::quadratic(isoflow::Vec2::zeros(), isoflow::Mat2::identity()).unwrap();
    assert!((curve.energy(&pot) - energy).abs() <= 1e-12);
    assert!((curve.momentum() - report["momentum"].as_f64().unwrap()).abs() <= 1e-12);
    let text = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(text.starts_with("param,x,y\n"));
}

#[test]
fn onewell_certificate_uses_the_seed() {
    let dir = TempDir::new().unwrap();
    let args = ["onewell", "--lambda1", "1", "--lambda2", "1.5", "--p0", "0.8,0.6", "--area", "0.2", "--certify", "8", "--report", "r.json"];
    let run = |seed: &str| {
        let mut a = args.to_vec();
        a.extend(["--seed", seed]);
        assert_eq!(status(&isoflow(dir.path(), &a)), 0);
        std::fs::read(dir.path().join("r.json")).unwrap()
    };
    let (a, b, c) = (run("1"), run("1"), run("2"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let report: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(report["certificate"]["all_minimal"], Value::Bool(true));
    assert_eq!(report["certificate"]["all_integrals_agree"], Value::Bool(true));
}

#[test]
fn twowell_reports_are_byte_identical_and_match_run_config() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("sep.json"), SEPARABLE).unwrap();
    let flags = || {
        let out = isoflow(dir.path(), &["twowell", "--potential", "sep.json", "--area", "0.02", "--nodes", "201", "--starts", "segment", "--out", "c.csv", "--report", "r.json"]);
        assert_eq!(status(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(dir.path().join("r.json")).unwrap()
    };
    let first = flags();
    assert_eq!(first, flags());
    let config = r#"{"subcommand": "twowell", "seed": 0, "args": {"potential": "sep.json", "area": 0.02, "nodes": 201, "starts": ["segment"], "out": "c.csv", "report": "r.json"}}"#;
    std::fs::write(dir.path().join("run.json"), config).unwrap();
    std::fs::remove_file(dir.path().join("r.json")).unwrap();
    assert_eq!(status(&isoflow(dir.path(), &["run", "--config", "run.json"])), 0);
    assert_eq!(first, std::fs::read(dir.path().join("r.json")).unwrap());

    let report = json(&dir.path().join("r.json"));
    let result = &report["result"];
    for key in ["energy", "multiplier", "bubble_count", "kkt_residual"] {
        assert!(!result[key].is_null(), "missing {key}");
    }
    assert!(result["kkt_residual"].as_f64().unwrap() <= 1e-6);
    // defaults are recorded
    assert!(report["options"]["rounds"].as_u64().is_some());
    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("\"energy\": 9.39"), "floats print with 17 digits");
}

#[test]
fn twowell_sweep_table() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("sep.json"), SEPARABLE).unwrap();
    let out = isoflow(dir.path(), &["twowell", "--potential", "sep.json", "--nodes", "201", "--starts", "segment", "--sweep", "0:0.02:0.04", "--sweep-out", "s.csv"]);
    assert_eq!(status(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&dir.path().join("s.csv"));
    assert_eq!(table.len(), 3);
    let nu: Vec<f64> = table.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(nu[0].abs() < 1e-6 && nu[1] > 0.0 && nu[2] > nu[1]);
    assert_eq!(status(&isoflow(dir.path(), &["plotdata", "--input", "s.csv", "--out", "p.csv"])), 0);
    assert_eq!(rows(&dir.path().join("p.csv")).len(), 3);
}

#[test]
fn wave_from_twowell_curve_and_plotdata() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("sep.json"), SEPARABLE).unwrap();
    assert_eq!(status(&isoflow(dir.path(), &["twowell", "--potential", "sep.json", "--area", "0.02", "--nodes", "401", "--starts", "segment", "--out", "c.csv", "--report", "t.json"])), 0);
    let out = isoflow(dir.path(), &["wave", "--curve", "c.csv", "--potential", "sep.json", "--out", "u.csv", "--report", "w.json"]);
    assert_eq!(status(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let w = json(&dir.path().join("w.json"));
    let t = json(&dir.path().join("t.json"));
    let nu = w["profile"]["nu"].as_f64().unwrap();
    let multiplier = t["result"]["multiplier"].as_f64().unwrap();
    assert!((nu - multiplier).abs() < 0.05 * multiplier, "{nu} vs {multiplier}");
    let h = w["profile"]["H"].as_f64().unwrap();
    assert!((h - w["sqrt2_energy"].as_f64().unwrap()).abs() < 1e-4 * h);
    assert!(w["second_variation"]["eigenvalues"].as_array().is_some_and(|v| !v.is_empty()));

    let missing = isoflow(dir.path(), &["plotdata", "--input", "u.csv", "--out", "p.csv"]);
    assert_eq!(status(&missing), 2, "profiles need the potential");
    assert_eq!(status(&isoflow(dir.path(), &["plotdata", "--input", "u.csv", "--potential", "sep.json", "--out", "p.csv"])), 0);
    let p = rows(&dir.path().join("p.csv"));
    let worst = p.iter().map(|r| r[3].parse::<f64>().unwrap().abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3, "equipartition {worst}");
}

#[test]
fn spectrum_transitions_at_the_speed_limit() {
    let dir = TempDir::new().unwrap();
    let out = isoflow(dir.path(), &["spectrum", "--lambda1", "1", "--lambda2", "1", "--nu", "0:0.5:4", "--out", "regimes.csv"]);
    assert_eq!(status(&out), 0);
    let table = rows(&dir.path().join("regimes.csv"));
    assert_eq!(table.len(), 9);
    for r in &table {
        let nu: f64 = r[0].parse().unwrap();
        let oscillatory = r[1] == "oscillatory-no-wave";
        assert_eq!(oscillatory, nu * nu >= 8.0, "nu {nu}");
    }
    let first_oscillatory = table.iter().position(|r| r[1] == "oscillatory-no-wave").unwrap();
    assert_eq!(table[first_oscillatory][11], "true");
    assert_eq!(table[first_oscillatory][0].parse::<f64>().unwrap(), 3.0);

    assert_eq!(status(&isoflow(dir.path(), &["plotdata", "--input", "regimes.csv", "--out", "long.csv"])), 0);
    let long = rows(&dir.path().join("long.csv"));
    assert_eq!(long.len(), 36);
    assert_eq!(long[0].len(), 4);
}

#[test]
fn nonexist_energies_decrease() {
    let dir = TempDir::new().unwrap();
    let out = isoflow(dir.path(), &["nonexist", "--q", "2", "--area", "3.14159265", "--jmax", "100", "--out", "e.csv", "--report", "e.json"]);
    assert_eq!(status(&out), 0);
    let e: Vec<f64> = rows(&dir.path().join("e.csv")).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(e.len(), 100);
    assert!(e.windows(2).all(|w| w[1] < w[0]));
    assert!(e[99] > 1.0 / 3.0);
    assert_eq!(json(&dir.path().join("e.json"))["strictly_decreasing"], Value::Bool(true));
}

#[test]
fn series_table_and_residual() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("q.json"), r#"{"kind": "radial-analytic-one-well", "wells": [[0, 0]], "params": {"coeffs": [1.0]}}"#).unwrap();
    let out = isoflow(dir.path(), &["series", "--potential", "q.json", "--beta", "1.5707963267948966", "--out", "t.json", "--report", "r.json"]);
    assert_eq!(status(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = json(&dir.path().join("t.json"));
    let degrees: Vec<&String> = table.as_object().unwrap().keys().collect();
    assert_eq!(degrees, ["3", "4", "5", "6", "7", "8", "9", "10"]);
    // degree four part of the closed form at beta = pi/2: -r^4 / 8
    assert!((table["4"]["4,0"].as_f64().unwrap() + 0.125).abs() < 1e-12);
    assert!((table["4"]["2,2"].as_f64().unwrap() + 0.25).abs() < 1e-12);
    let r = json(&dir.path().join("r.json"));
    assert!(r["residual"]["residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), r#"{"kind": "no-such-kind", "wells": [[0, 0]]}"#).unwrap();
    std::fs::write(d.join("extra.json"), r#"{"kind": "radial-power", "wells": [[0, 0]], "params": {"exponent": 2}, "colour": 1}"#).unwrap();
    assert_eq!(status(&isoflow(d, &["series", "--potential", "bad.json", "--beta", "1"])), 2);
    assert_eq!(status(&isoflow(d, &["series", "--potential", "extra.json", "--beta", "1"])), 2);
    assert_eq!(status(&isoflow(d, &["wave", "--curve", "none.csv", "--potential", "bad.json"])), 2);
    assert_eq!(status(&isoflow(d, &["plotdata", "--input", "none.csv", "--out", "p.csv"])), 2);
    assert_eq!(status(&isoflow(d, &["spectrum", "--lambda1", "1", "--lambda2", "1", "--nu", "1:-1:0"])), 2);
    assert_eq!(status(&isoflow(d, &["nonexist", "--q", "2", "--area", "1", "--jmax", "3", "--out", "no/such/dir/e.csv"])), 2);
    std::fs::write(d.join("run.json"), r#"{"subcommand": "spectrum", "args": {"lambda1": 1, "lambda2": 1, "nu": 1, "speed": 2}}"#).unwrap();
    assert_eq!(status(&isoflow(d, &["run", "--config", "run.json"])), 2);
    std::fs::write(d.join("run2.json"), r#"{"subcommand": "spectrum", "args": {"lambda1": 1, "lambda2": 1, "nu": 1}, "verbose": true}"#).unwrap();
    assert_eq!(status(&isoflow(d, &["run", "--config", "run2.json"])), 2);
    let threads = Command::new(env!("CARGO_BIN_EXE_isoflow"))
        .current_dir(d)
        .env("ISOFLOW_THREADS", "zero")
        .args(["spectrum", "--lambda1", "1", "--lambda2", "1", "--nu", "1"])
        .output()
        .unwrap();
    assert_eq!(status(&threads), 2);
}

#[test]
fn numerical_failure_exits_with_three_and_diagnostic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    std::fs::write(d.join("sep.json"), SEPARABLE).unwrap();
    // passes straight through the right-hand well before ending there
    std::fs::write(d.join("c.csv"), "param,x,y\n0,-1,0\n0.2,0,0\n0.4,2,0\n0.6,2,1\n0.8,1,1\n1,1,0\n").unwrap();
    let out = isoflow(d, &["wave", "--curve", "c.csv", "--potential", "sep.json", "--report", "w.json"]);
    assert_eq!(status(&out), 3);
    let diag = json(&d.join("w.json"));
    assert_eq!(diag["status"], "numerical-failure");
    assert_eq!(diag["kind"], "degenerate");
    let stderr: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(stderr["kind"], "degenerate");
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    std::fs::write(d.join("sep.json"), SEPARABLE).unwrap();
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_isoflow"))
            .current_dir(d)
            .env("ISOFLOW_THREADS", threads)
            .args(["twowell", "--potential", "sep.json", "--area", "0.05", "--nodes", "101", "--report", "r.json"])
            .output()
            .unwrap();
        assert_eq!(status(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(d.join("r.json")).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}
