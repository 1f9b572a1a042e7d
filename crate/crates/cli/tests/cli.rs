use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cylscale::io::mtx::read_matrix_market;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cylscale"))
}

fn base(lambdas: &str) -> serde_json::Value {
    serde_json::from_str(&format!(
        r#"{{
        "schema_version": 1,
        "geometry": {{"preset": "straight"}},
        "profiles": [{{"r": 4.0, "r_tilde": 6.0}}, {{"r": 5.0, "r_tilde": 8.0}}],
        "lambdas": {lambdas},
        "grid": {{"x_max": 12.0, "nx": 36, "ny": 6}},
        "analysis": {{"sector_trials": 20}}
    }}"#
    ))
    .unwrap()
}

fn write_config(dir: &Path, name: &str, v: &serde_json::Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn run(sub: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(sub)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn column(csv: &str, idx: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn portrait_unscaled_lies_on_real_axis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &base("[[0.0, 0.0]]"));
    let out = dir.path().join("out");
    let o = run("portrait", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let im = column(&csv, 1);
    assert_eq!(im.len(), 35 * 5);
    let re = column(&csv, 0);
    for (r, i) in re.iter().zip(&im) {
        assert!(i.abs() <= 1e-9 * (1.0 + r.abs()));
    }
    let svg = std::fs::read_to_string(out.join("portrait.svg")).unwrap();
    assert_eq!(svg.matches("class=\"eigenvalue").count(), 35 * 5);
}

#[test]
fn portrait_records_ray_angle_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &base("[[0.0, 0.25]]"));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run("portrait", &cfg, &a, &["--dump-matrices"]).status.success());
    assert!(run("portrait", &cfg, &b, &[]).status.success());
    for f in ["spectrum.json", "spectrum.csv", "portrait.svg"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("spectrum.json")).unwrap()).unwrap();
    let angle = json["ray_angle"].as_f64().unwrap();
    assert!((angle + 0.4899).abs() < 1e-4);
    let svg = std::fs::read_to_string(a.join("portrait.svg")).unwrap();
    assert!(svg.contains(&format!("\"ray_angle\":{angle}")));
    assert_eq!(svg.matches("class=\"ray\"").count(), 3);
    let k = read_matrix_market(&a.join("K.mtx")).unwrap();
    assert_eq!(k.nrows(), 35 * 5);
    assert_eq!(k.asymmetry(), 0.0);
}

#[test]
fn resonances_on_straight_end_are_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &base("[[0.0, 0.15], [0.0, 0.3]]"));
    let out = dir.path().join("out");
    let o = run("resonances", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["resonances"], 0);
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("drift"));
    assert_eq!(csv.lines().next().unwrap().split(',').count(), 7);
}

#[test]
fn resolvent_with_duplicated_lambda_agrees_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = base("[[0.2, 0.0], [0.2, 0.0]]");
    v["resolvent"] = serde_json::json!({
        "path": {"from": [-2.0, 0.5], "to": [5.0, 0.5], "samples": 6},
        "f": {"terms": [{"gamma": 1.0, "z0": 3.0, "coeffs": [[1.0, 0.0]], "mode": 1}]},
        "g": {"terms": [{"gamma": 1.0, "z0": 3.0, "coeffs": [[1.0, 0.0]], "mode": 1}]}
    });
    let cfg = write_config(dir.path(), "c.json", &v);
    let out = dir.path().join("out");
    let o = run("resolvent", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("trace.json")).unwrap()).unwrap();
    assert_eq!(json["agreement"].as_f64().unwrap(), 0.0);
    let csv = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 12);
    for l in csv.lines() {
        assert_eq!(l.split(',').count(), 5);
    }
}

#[test]
fn resolvent_path_crossing_a_ray_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = base("[[0.0, 0.15], [0.0, 0.3]]");
    v["resolvent"] = serde_json::json!({
        "path": [[20.0, 1.0], [20.0, -20.0]],
        "f": {"terms": [{"gamma": 1.0, "z0": 3.0, "coeffs": [[1.0, 0.0]], "mode": 1}]},
        "g": {"terms": [{"gamma": 1.0, "z0": 3.0, "coeffs": [[1.0, 0.0]], "mode": 1}]}
    });
    let cfg = write_config(dir.path(), "c.json", &v);
    let o = run("resolvent", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("crosses a ray"));
}

#[test]
fn validate_passes_and_reports_measurements() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &base("[[0.0, 0.25], [0.2, 0.0]]"));
    let out = dir.path().join("out");
    let o = run("validate", &cfg, &out, &["--seed", "11"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("validation.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(json["seed"], 11);
    assert!(json["checks"].as_array().unwrap().iter().all(|c| c["measured"].is_number()));
}

#[test]
fn out_of_disc_lambda_fails_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &base("[[0.0, 0.9]]"));
    let out = dir.path().join("out");
    let o = run("validate", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambdas[0]"));
    assert!(!out.exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = base("[[0.0, 0.25]]");
    v["grid"]["nz"] = 3.into();
    let cfg = write_config(dir.path(), "c.json", &v);
    let o = run("portrait", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));
}
