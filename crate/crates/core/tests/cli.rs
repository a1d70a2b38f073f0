use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn backus(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_backus"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_trace(path: &Path) -> Vec<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["theta", "phi_az", "y1", "y2", "y3", "u", "du_dxN", "grad_norm", "g"]);
    r.records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn unit_modulus_gives_the_laminar_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = backus(&["solve", "--mode", "odd", "--L", "6"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_trace(&out.join("trace.csv"));
    assert!(!rows.is_empty());
    for row in rows {
        assert!((row[7] - 1.0).abs() <= 1e-12);
        assert!((row[5] - row[4]).abs() <= 1e-12);
    }
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    let sol: Value = serde_json::from_slice(&std::fs::read(out.join("solution.json")).unwrap()).unwrap();
    assert_eq!(sol["mode"], "odd");
    assert_eq!(sol["L"], 6);
}

#[test]
fn manufactured_solve_converges() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"L": 8, "g": {"kind": "manufactured", "q": [{"exponents": [1, 0, 1], "coefficient": 1.0}], "eps": 0.05}}"#,
    );
    let out = dir.path().join("out");
    let o = backus(&["solve", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    assert!(report["boundary_residual"].as_f64().unwrap() <= 1e-6);
    for row in read_trace(&out.join("trace.csv")) {
        let exact = row[4] + 0.05 * row[2] * row[4];
        assert!((row[5] - exact).abs() <= 1e-6);
        assert!((row[7] - row[8]).abs() <= 1e-6);
    }
}

#[test]
fn malformed_g_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    for text in [
        r#"{"g": {"kind": "constant"}}"#,
        r#"{"g": {"kind": "constant", "value": -2.0}}"#,
        r#"{"g": {"kind": "tabulated", "path": "/nonexistent/g.csv"}}"#,
        r#"{"g": {"kind": "manufactured", "q": [{"exponents": [2, 0, 0], "coefficient": 1.0}], "eps": 0.1}}"#,
        "not json",
    ] {
        let cfg = write_config(dir.path(), text);
        let out = dir.path().join("out");
        let o = backus(&["solve", "--config", &cfg], &out);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(!out.exists(), "{text}");
    }
    let out = dir.path().join("out");
    assert_eq!(backus(&["solve", "--tol", "-1"], &out).status.code(), Some(2));
    assert_eq!(backus(&["solve", "--L", "0"], &out).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn tabulated_unit_modulus() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("g.csv");
    let mut text = String::from("theta,phi_az,g\n");
    for i in 0..=12 {
        for j in 0..8 {
            let t = std::f64::consts::PI * i as f64 / 12.0;
            let p = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
            text.push_str(&format!("{t},{p},1.0\n"));
        }
    }
    std::fs::write(&table, text).unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(r#"{{"L": 4, "g": {{"kind": "tabulated", "path": {:?}}}}}"#, table.to_str().unwrap()),
    );
    let out = dir.path().join("out");
    let o = backus(&["solve", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for row in read_trace(&out.join("trace.csv")) {
        assert!((row[7] - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn divergence_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"L": 6, "max_iter": 1, "g": {"kind": "manufactured", "q": [{"exponents": [1, 0, 1], "coefficient": 1.0}], "eps": 0.05}}"#,
    );
    let out = dir.path().join("out");
    let o = backus(&["solve", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(4));
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], false);
    assert!(!out.join("solution.json").exists());
}

#[test]
fn linearized_and_estimates_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"L": 2, "grid": {"sphere_theta": 32, "sphere_phi": 64, "disk_r": 32, "disk_phi": 64, "rim_samples": 64},
            "linearized": {"phi": [{"l": 0, "m": 0, "value": 3.5449077018110318}], "psi_cos": [0.0], "probes": 5}}"#,
    );
    let out = dir.path().join("out");
    let o = backus(&["linearized", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lin: Value = serde_json::from_slice(&std::fs::read(out.join("linearized.json")).unwrap()).unwrap();
    assert_eq!(lin["probes"].as_array().unwrap().len(), 5);
    assert!(lin["max_path_difference"].as_f64().unwrap() < 1e-2);
    for p in lin["probes"].as_array().unwrap() {
        let x = p["x"].as_array().unwrap()[2].as_f64().unwrap();
        assert!((p["spectral"].as_f64().unwrap() - x).abs() < 1e-12);
    }

    let o = backus(&["estimates"], &out);
    assert_eq!(o.status.code(), Some(0));
    let est: Value = serde_json::from_slice(&std::fs::read(out.join("estimates.json")).unwrap()).unwrap();
    assert_eq!(est["decay"].as_array().unwrap().len(), 2);
    assert_eq!(est["integral_lemma"].as_array().unwrap().len(), 27);
}
