use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graph-selftest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bell_reports_bounds() {
    let out = run(&["bell", "--preset", "b2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.contains("b2: 2(A1+B1)B2B3B4 + (A1-B1)A2 + (A1-B1)A3 + A2A4"),
        "{text}"
    );
    assert!(text.contains("beta_C = 5"));
    assert!(text.contains("beta_Q = 6.656854"));
    assert!(text.contains("experimental frame (H on {2,3,4})"));

    let out = run(&["bell", "--preset", "B6", "--json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["beta_c"], 4.0);
    assert!((v["beta_q"].as_f64().unwrap() - 4.0 * 2f64.sqrt()).abs() < 1e-5);
    assert_eq!(v["hadamard_sites"], serde_json::json!([1, 4]));
}

#[test]
fn bell_from_spec_file() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("b1.json");
    fs::write(
        &spec,
        r#"{"stabilizers": [[1], [2], [3], [4], [2, 3], [2, 4]], "ac": [1], "pairs": [[1, 2]], "remainder": [5, 6]}"#,
    )
    .unwrap();
    let out = run(&["bell", "--spec", spec.to_str().unwrap(), "--graph", "star4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("custom: (A1+B1)B2B3B4 + (A1-B1)A2 + A2A3 + A2A4"));

    let empty = dir.path().join("empty.json");
    fs::write(
        &empty,
        r#"{"stabilizers": [[1]], "ac": [1], "pairs": [], "remainder": []}"#,
    )
    .unwrap();
    let out = run(&[
        "bell",
        "--spec",
        empty.to_str().unwrap(),
        "--graph",
        "star4",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no terms"), "{}", stderr(&out));

    let out = run(&["bell", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn certify_exit_codes() {
    let out = run(&[
        "certify",
        "--preset",
        "b1",
        "--bell-value",
        "4.738",
        "--sigma",
        "0.021",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "b1: F ≥ 0.91(2), GENUINE_ENTANGLEMENT");

    let out = run(&[
        "certify",
        "--preset",
        "b5",
        "--bell-value",
        "6.434",
        "--sigma",
        "0.077",
        "--coefficients",
        "published",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("F ≥ 0.83(6)"), "{}", stdout(&out));

    let out = run(&[
        "certify",
        "--preset",
        "b1",
        "--bell-value",
        "4.0",
        "--coefficients",
        "published",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], "INCONCLUSIVE");
    assert!((v["fidelity_bound"].as_f64().unwrap() - 0.171573).abs() < 1e-6);
    assert_eq!(v["config"]["coefficients"], "published");

    let out = run(&[
        "certify",
        "--preset",
        "b1",
        "--bell-value",
        "9",
        "--sigma",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr(&out).is_empty());

    assert_eq!(
        run(&["certify", "--preset", "b9", "--bell-value", "4"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn certificate_file_matches_stdout() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("cert.json");
    let out = run(&[
        "certify",
        "--preset",
        "b3",
        "--bell-value",
        "8.266",
        "--sigma",
        "0.053",
        "--coefficients",
        "published",
        "--out",
        out_path.to_str().unwrap(),
        "--json",
    ]);
    assert!(out.status.success());
    let printed: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json_file(&out_path), printed);
    assert_eq!(printed["inequality"], "b3");
    assert_eq!(printed["verdict"], "GENUINE_ENTANGLEMENT");
}

#[test]
fn simulation_is_reproducible_and_certifies() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    for d in [&first, &second] {
        let out = run(&[
            "simulate",
            "--preset",
            "b1",
            "--events",
            "20000",
            "--seed",
            "11",
            "--out-dir",
            d.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let mut names: Vec<_> = fs::read_dir(&first)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 5, "{names:?}");
    for name in &names {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(second.join(name)).unwrap(),
            "{name:?}"
        );
    }
    let summary = json_file(&first.join("summary.json"));
    let (v, s) = (
        summary["bell_value"].as_f64().unwrap(),
        summary["bell_sigma"].as_f64().unwrap(),
    );
    assert!((v - summary["beta_q"].as_f64().unwrap()).abs() <= 4.0 * s);

    let out = run(&[
        "certify",
        "--preset",
        "b1",
        "--counts-dir",
        first.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let cert: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(cert["fidelity_bound"].as_f64().unwrap() > 0.9);
    assert!((cert["bell_value"].as_f64().unwrap() - v).abs() < 1e-5);
}

#[test]
fn noisy_simulation_from_config() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("sim.json");
    fs::write(
        &config,
        r#"{"state": "cluster4", "noise_p": 0.2, "events_per_setting": 50000, "seed": 4}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("run");
    let out = run(&[
        "simulate",
        "--preset",
        "b6",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = json_file(&out_dir.join("summary.json"));
    assert_eq!(summary["config"]["noise_p"], 0.2);
    let (v, s) = (
        summary["bell_value"].as_f64().unwrap(),
        summary["bell_sigma"].as_f64().unwrap(),
    );
    assert!((v - summary["expected_value"].as_f64().unwrap()).abs() <= 4.0 * s);
    assert!(v < summary["beta_q"].as_f64().unwrap());
}

#[test]
fn unknown_state_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "simulate",
        "--preset",
        "b1",
        "--state",
        "w4",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("w4"));
}

#[test]
fn fidelity_inputs() {
    let dir = TempDir::new().unwrap();
    let ghz = dir.path().join("ghz.json");
    fs::write(
        &ghz,
        r#"{"kind": "ghz", "population": {"value": 0.994, "sigma": 0.002}, "coherence": [0.918, -0.924, 0.916, -0.920]}"#,
    )
    .unwrap();
    let out = run(&["fidelity", "--input", ghz.to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["fidelity"].as_f64().unwrap() - 0.957).abs() <= 0.001);

    let cluster = dir.path().join("cluster.json");
    fs::write(
        &cluster,
        r#"{"kind": "cluster", "expectations": [0.993, 0.930, 0.931, 0.993, 0.933, 0.927, 0.986, 0.932, 0.932, 0.944, 0.920, 0.924, 0.942, 0.924, 0.916, 1]}"#,
    )
    .unwrap();
    let out = run(&["fidelity", "--input", cluster.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(
        stdout(&out).contains("cluster fidelity F = 0.945"),
        "{}",
        stdout(&out)
    );

    let ones = dir.path().join("ones.json");
    fs::write(
        &ones,
        format!(r#"{{"kind": "cluster", "expectations": {:?}}}"#, [1.0; 16]),
    )
    .unwrap();
    let out = run(&["fidelity", "--input", ones.to_str().unwrap(), "--json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["fidelity"], 1.0);

    let short = dir.path().join("short.json");
    fs::write(&short, r#"{"kind": "cluster", "expectations": [1, 1]}"#).unwrap();
    assert_eq!(
        run(&["fidelity", "--input", short.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn robustness_writes_coefficients_and_curve() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("b6.json");
    let curve_path = dir.path().join("b6.csv");
    let out = run(&[
        "robustness",
        "--preset",
        "b6",
        "--grid",
        "7",
        "--points",
        "11",
        "--out",
        out_path.to_str().unwrap(),
        "--curve",
        curve_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let coeffs = json_file(&out_path);
    assert_eq!(coeffs["inequality"], "b6");
    assert_eq!(coeffs["grid"], 7);
    let (s, mu, bq) = (
        coeffs["s"].as_f64().unwrap(),
        coeffs["mu"].as_f64().unwrap(),
        coeffs["beta_q"].as_f64().unwrap(),
    );
    assert!((s * bq + mu - 1.0).abs() < 1e-5);

    let csv = fs::read_to_string(&curve_path).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "bell_value,fidelity_bound");
    assert_eq!(rows.len(), 12);
    assert!(rows[11].ends_with(",1.000000"), "{}", rows[11]);
    assert!(stderr(&out).contains("F = 1/2 at Bell value"));
}
