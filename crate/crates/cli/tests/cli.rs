use std::process::{Command, Output};

use serde_json::Value;

fn obscost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obscost")).args(args).env_remove("OBSCOST_LAMBDA_PROFILE").output().unwrap()
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn cost_report_embeds_config_and_certificate() {
    let v = report(&obscost(&["cost", "--length", "4"]));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["config"]["command"], "cost");
    assert_eq!(v["config"]["length"], 4.0);
    assert_eq!(v["result"]["epsilon"]["headline_log_neg_log_eps0"]["depth"], 2);
    assert!(v["result"]["epsilon"]["log_eps0"]["sign"] == -1);
    assert_eq!(v["result"]["gamma"]["bounds"].as_array().unwrap().len(), 8);
}

#[test]
fn domain_errors_exit_with_two() {
    let out = obscost(&["cost", "--length", "6.2831853"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("critical length"));
    assert_eq!(obscost(&["gamma", "--length", "3"]).status.code(), Some(2));
    assert_eq!(obscost(&["gamma"]).status.code(), Some(2));
    assert_eq!(obscost(&["simulate", "--length", "4", "--nodes", "many"]).status.code(), Some(2));
    assert_eq!(obscost(&["cost", "--length", "4", "--stub-e13", "6"]).status.code(), Some(2));
}

#[test]
fn critical_reports_nearby_witness() {
    let v = report(&obscost(&["critical", "--length", "9.6"]));
    assert_eq!(v["result"]["is_critical"], false);
    assert_eq!(v["result"]["witness"], serde_json::json!([1, 2]));
    let d = v["result"]["d"]["mantissa"].as_f64().unwrap();
    let want = (9.6f64.powi(2) - 4.0 * std::f64::consts::PI.powi(2) * 7.0 / 3.0).abs();
    assert!((d - want).abs() < 1e-9);
}

#[test]
fn stubbed_constants_give_exact_covering() {
    let v = report(&obscost(&["constants", "--length", "4", "--k", "1", "--stub-e13", "6"]));
    let c = &v["result"]["covering"];
    assert_eq!(c["m_c"]["exact"], "4");
    assert_eq!(c["n_c"]["exact"], "20");
    assert_eq!(c["b"]["exact"], "1350851717672992089");
    assert_eq!(v["result"]["e13_stubbed"], true);
}

#[test]
fn config_file_env_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "length = 4\nk1 = 10\nlambda_profile = default\n").unwrap();
    let path = cfg.to_str().unwrap();
    let v = report(&obscost(&["gamma", "--config", path]));
    assert_eq!(v["config"]["k1"], 10.0);

    let out = Command::new(env!("CARGO_BIN_EXE_obscost"))
        .args(["gamma", "--config", path, "--k1", "1"])
        .env("OBSCOST_LAMBDA_PROFILE", "unit")
        .output()
        .unwrap();
    let v = report(&out);
    assert_eq!(v["config"]["k1"], 1.0);
    assert_eq!(v["config"]["lambda_profile"], "unit");

    std::fs::write(&cfg, "length = 4\nk1 = \n").unwrap();
    let out = obscost(&["gamma", "--config", path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2: field `k1`"));
}

#[test]
fn simulate_writes_csv_trace() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let out_json = dir.path().join("report.json");
    let out = obscost(&[
        "simulate",
        "--length",
        "5.5",
        "--nodes",
        "64",
        "--time",
        "0.2",
        "--dt",
        "1e-3",
        "--csv",
        csv.to_str().unwrap(),
        "--output",
        out_json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_json).unwrap()).unwrap();
    assert!(v["result"]["energy_residual"].as_f64().unwrap() < 1e-2);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,flux,l2_norm,h1_norm,h3_norm"));
    assert_eq!(text.lines().count() - 1, v["result"]["csv_rows"].as_u64().unwrap() as usize);
}

#[test]
fn verify_passes_for_moderate_radius() {
    let v = report(&obscost(&["verify", "--length", "4", "--k1", "10", "--jobs", "2"]));
    assert_eq!(v["result"]["ok"], true);
    assert!(v["result"]["precision_rel_change"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn lab_commands_run() {
    let v = report(&obscost(&["gramian", "--length", "6.283185307179586", "--nodes", "80", "--restrict-tol", "1e-2"]));
    let s = &v["result"]["summary"];
    let r = &v["result"]["restricted"];
    assert!(r["c_num"].as_f64().unwrap() > s["c_num"].as_f64().unwrap());
    assert!(r["subspace_dim"].as_u64().unwrap() >= 1);

    let v = report(&obscost(&["subspace-m", "--length", "4", "--nodes", "64", "--tol", "1e-3"]));
    assert_eq!(v["result"]["basis"].as_array().unwrap().len(), 0);

    let v = report(&obscost(&["gramschmidt", "--length", "6.283185307179586", "--nodes", "128"]));
    assert_eq!(v["result"]["stop_reason"], "residual-below-half-gamma");
}

#[test]
fn reports_are_deterministic_across_job_counts() {
    let args = ["subspace-m", "--length", "9.606", "--nodes", "96"];
    let a = obscost(&args).stdout;
    let mut with_jobs = args.to_vec();
    with_jobs.extend(["--jobs", "1"]);
    assert_eq!(a, obscost(&with_jobs).stdout);
}
