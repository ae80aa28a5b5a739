use std::process::{Command, Output};

use serde_json::Value;

fn ecyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecyl")).args(args).output().expect("spawn ecyl")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn headline_energy() {
    let v = json(&ecyl(&["energy", "--strip", "--d", "1", "--H", "2", "--phi", "90", "--channel", "em", "--mmax", "8"]));
    let e = v["result"]["value"].as_f64().unwrap();
    assert!((e / -0.00637 - 1.0).abs() < 0.01, "{e}");
    assert_eq!(v["config"]["ladder"], serde_json::json!([4, 6, 8]));
    assert_eq!(v["pfa"].as_f64(), Some(0.0));
    assert!(v["ratio_to_pfa"].is_null());
    assert_eq!(v["notes"].as_array().unwrap().len(), 1);
}

#[test]
fn far_separation_is_negligible() {
    let v = json(&ecyl(&["energy", "--H", "1e6", "--d", "1", "--mmax", "4"]));
    assert!(v["result"]["value"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(ecyl(&["energy", "--H", "0.5", "--d", "1", "--phi", "90", "--strip"]).status.code(), Some(1));
    assert_eq!(ecyl(&["energy", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(ecyl(&["energy", "--H", "0.5", "--d", "1", "--phi", "0", "--strip", "--mmax", "4"]).status.code(), Some(2));
    assert_eq!(ecyl(&["mathieu", "--fn", "Ke", "--m", "1", "--q", "2", "--at", "1"]).status.code(), Some(1));
    assert_eq!(ecyl(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"d": 1.0, "H": 50.0, "phi_deg": 30.0, "ladder": [2, 3], "channel": "d"}"#).unwrap();
    let v = json(&ecyl(&["energy", "--config", path.to_str().unwrap(), "--H", "40"]));
    assert_eq!(v["config"]["H"].as_f64(), Some(40.0));
    assert_eq!(v["config"]["phi_deg"].as_f64(), Some(30.0));
    assert_eq!(v["result"]["channel_values"].as_array().unwrap().len(), 1);
    assert_eq!(v["result"]["channel_values"][0]["bc"], "Dirichlet");

    std::fs::write(&path, r#"{"d": 1.0, "Hh": 3.0}"#).unwrap();
    let out = ecyl(&["energy", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn sweep_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = ecyl(&[
        "sweep", "--variable", "phi", "--values", "90,45", "--H", "2.5", "--mmax", "4", "-o", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with('#') && lines[1].starts_with("# config: {"));
    assert_eq!(lines[2], "phi_deg,E_D,E_N,E_EM,E_PFA,ratio,err_estimate");
    let first: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(first[0], "90");
    assert_eq!(first[4], "0e0");
    assert_eq!(first[5], "");
    let second: Vec<f64> = lines[4].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(second[0], 45.0);
    assert!((second[1] + second[2] - second[3]).abs() < 1e-15);
    assert!((second[3] / second[4] - second[5]).abs() < 1e-12);
}

#[test]
fn sweep_keeps_going_past_failed_points() {
    let out = ecyl(&["sweep", "--variable", "H", "--values", "0.5,8", "--phi", "90", "--mmax", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows[0], "0.5,,,,,,");
    assert!(rows[1].starts_with("8,-"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn mathieu_evaluation_and_dump() {
    let v = json(&ecyl(&["mathieu", "--fn", "se", "--m", "1", "--q", "1", "--at", "0,1.5707963267948966", "--dump"]));
    assert!((v["char_value"].as_f64().unwrap() + 0.11024881699209521).abs() < 1e-11);
    assert_eq!(v["points"][0]["value"].as_f64(), Some(0.0));
    assert!(v["expansion"]["coeffs"].as_array().unwrap().len() > 3);

    let i = json(&ecyl(&["mathieu", "--fn", "Ie", "--m", "2", "--q", "-1.5", "--at", "0.7"]));
    let k = json(&ecyl(&["mathieu", "--fn", "Ke", "--m", "2", "--q", "-1.5", "--at", "0.7"]));
    let f = |v: &Value, key: &str| v["points"][0][key].as_f64().unwrap();
    let w = f(&i, "value") * f(&k, "derivative") - f(&i, "derivative") * f(&k, "value");
    assert!((w + 1.0).abs() < 1e-10, "{w}");
}

#[test]
fn validate_suites() {
    for suite in ["mathieu", "identities"] {
        let v = json(&ecyl(&["validate", "--suite", suite]));
        assert_eq!(v["passed"], true);
        assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    }
}
