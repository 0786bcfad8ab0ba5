use std::path::Path;
use std::process::{Command, Output};

use gqarch::app::{ExperimentConfig, ExperimentSection, Target};
use gqarch::models::{fixtures, AsymGarch11Spec, InnovationSpec, ModelSpec};
use gqarch::simulate::SimConfig;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gqarch")).args(args).output().unwrap()
}

fn write_config(dir: &Path, model: ModelSpec, n: usize) -> String {
    let cfg = ExperimentConfig {
        model,
        innovation: InnovationSpec::standard_normal(),
        simulation: SimConfig::new(n, 7).with_burn_in(200),
        experiment: ExperimentSection {
            replicates: 3,
            targets: vec![Target::M2, Target::Rho],
            max_lag: 3,
            write_series: false,
            ..Default::default()
        },
    };
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_on_q2_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ModelSpec::Gqarch(fixtures::gqarch_q2(1000)), 2000);
    let o = run(&["check", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("B_{2,gamma} < 1"));
    assert!(text.lines().count() > 5);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["check"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("r.csv");
    std::fs::write(&input, "0.1\n-0.2\n").unwrap();
    let o = run(&["estimate", "--input", input.to_str().unwrap(), "--family", "arma"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn nonstationary_mc_fails_with_condition_name() {
    let dir = tempfile::tempdir().unwrap();
    let model = ModelSpec::AsymGarch11(AsymGarch11Spec::new(0.1, 0.9, 0.2, 0.3).unwrap());
    let cfg = write_config(dir.path(), model, 2000);
    let o = run(&["mc", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("b^2 + gamma < 1"));
}

#[test]
fn missing_config_file_exits_one() {
    let o = run(&["moments", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_then_estimate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = ModelSpec::AsymGarch11(AsymGarch11Spec::new(0.1, 0.5, 0.2, 0.3).unwrap());
    let cfg = write_config(dir.path(), model, 3000);
    let out = dir.path().join("out");
    let o = run(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--replicate",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let series = out.join("series_2.csv");
    let text = std::fs::read_to_string(&series).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,r,sigma_sq"));
    assert_eq!(lines.count(), 3000);

    let o = run(&[
        "estimate",
        "--input",
        series.to_str().unwrap(),
        "--family",
        "garch11",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["params"]["family"], "garch11");
    assert!(fit["objective"].as_f64().unwrap().is_finite());
}

#[test]
fn moments_and_mc_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let model = ModelSpec::AsymGarch11(AsymGarch11Spec::new(0.1, 0.5, 0.2, 0.3).unwrap());
    let cfg = write_config(dir.path(), model, 5000);
    let out = dir.path().join("out");
    let o = run(&[
        "moments",
        "--config",
        &cfg,
        "--max-lag",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((m["m2"].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-12);
    assert_eq!(m["rho"].as_array().unwrap().len(), 4);
    assert!(out.join("moments.json").exists());

    let o = run(&["mc", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["metadata"]["seed"], 11);
    assert_eq!(report["records"].as_array().unwrap().len(), 4);
    assert!(!out.join("autocov_sq.csv").exists());
}

#[test]
fn leverage_and_hist_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let model = ModelSpec::AsymGarch11(AsymGarch11Spec::new(0.1, -0.25, 0.2, 0.1).unwrap());
    let cfg = write_config(dir.path(), model, 2000);
    let out = dir.path().join("out");
    let o = run(&[
        "leverage",
        "--config",
        &cfg,
        "--horizon",
        "30",
        "--order",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["classification"], "leverage_k");
    assert_eq!(v["norm_bound_holds"], true);
    let csv = std::fs::read_to_string(out.join("leverage.csv")).unwrap();
    assert_eq!(csv.lines().count(), 31);

    let o = run(&[
        "hist",
        "--config",
        &cfg,
        "--gammas",
        "0,0.5",
        "--points",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("density_gamma_0.5.csv").exists());
}
