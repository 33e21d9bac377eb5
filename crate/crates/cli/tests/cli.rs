use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_willmore-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn report_examples() {
    let cases = [
        (r#"{"kind":"covered_inverted_catenoid","theta0":2}"#, 2, "regular_branch_order_leap"),
        (r#"{"kind":"weierstrass_minimal","f":[0,1],"g":[0,1]}"#, 2, "removable"),
        (r#"{"kind":"plane"}"#, 1, "removable"),
        (r#"{"kind":"inverted_catenoid"}"#, 1, "log_singular_H"),
    ];
    for (surface, theta0, verdict) in cases {
        let out = run(&["report", "--surface", surface]);
        assert!(out.status.success(), "{surface}");
        let v = json(&out);
        assert_eq!(v["theta0"], theta0);
        assert_eq!(v["verdict"], verdict);
    }
    let plane = json(&run(&["report", "--surface", r#"{"kind":"plane"}"#]));
    for c in plane["c0"].as_array().unwrap() {
        assert!(c.as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn parse_errors_exit_2_and_numerical_errors_exit_3() {
    let out = run(&["report", "--surface", r#"{"kind":"torus"}"#]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "surface");

    let out = run(&["report", "--surface", r#"{"kind":"plane"}"#, "--kappa", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "config");

    let out = run(&["report", "--surface", r#"{"kind":"catenoid"}"#]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_kind(&out), "numerical");

    let out = run(&["report"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn surface_and_config_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let surface = dir.path().join("surface.json");
    std::fs::write(&surface, r#"{"kind":"inverted_catenoid","branch":-1}"#).unwrap();
    let arg = format!("@{}", surface.display());
    let v = json(&run(&["residue", "--surface", &arg]));
    assert!(v["mean"][2].as_f64().unwrap() > 50.0);

    let config = dir.path().join("run.json");
    let out_path = dir.path().join("residue.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "surface": {"kind": "inverted_catenoid"},
            "annulus": [0.1, 0.2],
            "out": out_path,
        })
        .to_string(),
    )
    .unwrap();
    let out = run(&["residue", "--config", config.to_str().unwrap(), "--annulus", "0.1,0.4"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let radii: Vec<f64> = v["residues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["radius"].as_f64().unwrap())
        .collect();
    assert_eq!(radii.first(), Some(&0.1));
    assert_eq!(radii.last(), Some(&0.4));
}

#[test]
fn verify_exit_code_follows_the_checks() {
    let ok = run(&["verify", "--surface", r#"{"kind":"sphere_patch"}"#, "--points", "5"]);
    assert!(ok.status.success());
    let v = json(&ok);
    assert_eq!(v["failed"], 0);
    assert_eq!(v["total"].as_u64().unwrap(), v["results"].as_array().unwrap().len() as u64);

    let bad = run(&["verify", "--surface", r#"{"kind":"quartic_graph"}"#, "--points", "5"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(json(&bad)["failed"].as_u64().unwrap() > 0);
    assert_eq!(error_kind(&bad), "verification");
}

#[test]
fn verify_writes_csv_for_a_csv_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("checks.csv");
    let out = run(&[
        "verify",
        "--surface",
        r#"{"kind":"plane","dim":4}"#,
        "--points",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("name,x1,x2,residual,tolerance,pass,seed\n"));
}

#[test]
fn dump_and_delta_tables() {
    let out = run(&[
        "dump",
        "--surface",
        r#"{"kind":"embedded_variant","base":{"kind":"sphere_patch"},"m":4,"seed":1}"#,
        "--nr",
        "4",
        "--nphi",
        "8",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x1,x2,lambda,H_1,H_2,H_3,H_4,grad_n_norm,defect_1,defect_2"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 32);
    for row in rows {
        let h: f64 = row
            .split(',')
            .skip(3)
            .take(4)
            .map(|s| s.parse::<f64>().unwrap().powi(2))
            .sum();
        assert!((h.sqrt() - 1.0).abs() < 1e-6);
    }

    let out = run(&[
        "delta",
        "--surface",
        r#"{"kind":"inverted_catenoid"}"#,
        "--annulus",
        "0.01,0.2",
        "--nr",
        "5",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let deltas: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(deltas.len(), 5);
    assert!(deltas.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn energy_table_converges() {
    let out = run(&[
        "energy",
        "--surface",
        r#"{"kind":"sphere_patch"}"#,
        "--annulus",
        "0.1,0.5",
        "--nr",
        "8",
        "--nphi",
        "16",
    ]);
    let v = json(&out);
    let area = 2.0 * std::f64::consts::PI * (2.0 / 1.01 - 2.0 / 1.25);
    assert!((v["willmore"].as_f64().unwrap() - area).abs() < 1e-5 * area);
    assert_eq!(v["convergence"].as_array().unwrap().len(), 3);
}
