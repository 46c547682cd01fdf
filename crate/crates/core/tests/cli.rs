//! End-to-end runs of the command-line binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use lte_iot_energy::ModelConfig;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lte-iot-energy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lte-iot-energy-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn analyze_reports_core_metrics() {
    let o = bin(&["analyze", "--procedure", "cp", "--iat", "3600000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["e_p_uj", "avg_power_mw", "lifetime_years"] {
        assert!(v[key].as_f64().unwrap() > 0.0, "{key}");
    }
    assert_eq!(v["procedure"], "cp");
}

#[test]
fn sweep_emits_full_grid() {
    let args = [
        "sweep",
        "--procedure",
        "all",
        "--iat",
        "logspace:320:172800000:30",
        "--pout",
        "0,0.1,0.3",
    ];
    let o = bin(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "procedure,iat_ms,p_out,e_p_uj,avg_power_mw,lifetime_years,n_p,b_drop");
    assert_eq!(lines.len(), 271);
    assert!(lines[1].starts_with("sr,320,0,"));
    // byte-stable across runs
    assert_eq!(stdout(&bin(&args)), text);
}

#[test]
fn validate_passes_at_reference_point() {
    let o = bin(&["validate", "--iat", "10000", "--steps", "1000000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn simulate_reports_provenance() {
    let o = bin(&["simulate", "--iat", "10000", "--steps", "100000", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["steps"], 100000);
    assert!(v["generator"].as_str().unwrap().contains("ChaCha8"));
    assert!(v["energy_per_packet"]["z"].is_number());
    assert!(v["states"].as_array().unwrap().len() > 300);
}

#[test]
fn emitted_config_reloads_identically() {
    let path = scratch("emitted.json");
    let o = bin(&[
        "analyze",
        "--procedure",
        "up",
        "--iat",
        "12345.5",
        "--pout",
        "0.2",
        "--emit-config",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cfg = ModelConfig::from_json_file(&path).unwrap();
    assert_eq!(cfg.traffic.iat_ms(), 12345.5);
    assert_eq!(cfg.access.p_c, 0.2);
    let again = ModelConfig::from_json_str(&cfg.to_json_string()).unwrap();
    assert_eq!(again, cfg);

    let o = bin(&["analyze", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["procedure"], "up");
}

#[test]
fn config_errors_name_the_key() {
    let bad_value = scratch("bad_value.json");
    std::fs::write(&bad_value, r#"{"p_c": 1.5}"#).unwrap();
    let o = bin(&["analyze", "--config", bad_value.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("p_c"), "{err}");

    let unknown = scratch("unknown.json");
    std::fs::write(&unknown, r#"{"t_ls": 80}"#).unwrap();
    let o = bin(&["analyze", "--config", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("t_ls"));

    let malformed = scratch("malformed.json");
    std::fs::write(&malformed, "{\"t_i\": ").unwrap();
    let o = bin(&["analyze", "--config", malformed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = bin(&["analyze", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dumps_are_csv_tables() {
    let o = bin(&["dump", "--what", "profile"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("state,energy_uj,duration_ms\n"));
    assert_eq!(text.lines().count(), 314);

    let o = bin(&["dump", "--what", "distribution", "--iat", "10000"]);
    let text = stdout(&o);
    assert!(text.starts_with("state,probability\nOff,"));

    let o = bin(&["dump", "--what", "matrix", "--iat", "10000"]);
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("state,Off,RA(0),"));
    assert_eq!(text.lines().count(), 314);
}
