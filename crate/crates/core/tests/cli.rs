use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_casimir-aniso"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_line(text: &str, n: usize) -> Vec<String> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .nth(n)
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect()
}

#[test]
fn psi_row_is_repulsive_in_middle_region() {
    let o = run(&["psi", "--m1", "1.5", "--m2", "0.8", "--m3", "1.0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# units:"));
    let row = data_line(&text, 1);
    let psi: f64 = row[3].parse().unwrap();
    assert!(psi < 0.0);
    assert_eq!(row[6], "Repulsive");
}

#[test]
fn force_json_for_index_matched_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.json");
    std::fs::write(
        &path,
        r#"{"eps1":{"constant":2.0},"eps2":{"constant":2.0},"eps3x":{"constant":2.0},"eps3z":{"constant":2.0}}"#,
    )
    .unwrap();
    let o = run(&[
        "force",
        "--material",
        path.to_str().unwrap(),
        "--a",
        "1e-6",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value"], 0.0);
    assert_eq!(v["separation"], 1e-6);
    assert_eq!(v["units"], "N/m^2");
    assert!(v["error_estimate"].is_number());
}

#[test]
fn dispersive_material_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.json");
    std::fs::write(
        &path,
        r#"{"eps1":{"oscillator":[[2.0,2e16]]},"eps2":{"constant":1.6},
            "eps3x":{"constant":2.0},"eps3z":{"oscillator":[[1.5,1e16],[0.5,3e15]]}}"#,
    )
    .unwrap();
    let o = run(&[
        "energy",
        "--material",
        path.to_str().unwrap(),
        "--a",
        "1e-7",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let o = run(&[
        "force",
        "--material",
        path.to_str().unwrap(),
        "--a",
        "1e-7",
        "--method",
        "retarded",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr)
        .contains("retarded limit requires static permittivities"));
}

#[test]
fn usage_errors_exit_two() {
    let conflicting = run(&[
        "force",
        "--material",
        "x.json",
        "--eps1",
        "2",
        "--a",
        "1e-6",
    ]);
    assert_eq!(conflicting.status.code(), Some(2));
    let missing_file = run(&[
        "force",
        "--material",
        "/nonexistent/sys.json",
        "--a",
        "1e-6",
    ]);
    assert_eq!(missing_file.status.code(), Some(2));
    let incomplete = run(&["force", "--eps1", "2", "--a", "1e-6"]);
    assert_eq!(incomplete.status.code(), Some(2));
    let unknown = run(&["psi", "--m1", "1", "--m2", "1", "--m3", "1", "--bogus"]);
    assert_eq!(unknown.status.code(), Some(2));
    let bad_tol = run(&[
        "psi",
        "--m1",
        "1",
        "--m2",
        "1",
        "--m3",
        "1",
        "--rel-tol",
        "0",
    ]);
    assert_eq!(bad_tol.status.code(), Some(2));
    assert!(!bad_tol.stderr.is_empty());
}

#[test]
fn domain_errors_exit_one_with_json() {
    let o = run(&[
        "force", "--eps1", "3", "--eps2", "1.6", "--eps3x", "2", "--eps3z", "2", "--a", "-1e-6",
        "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "domain");
    let o = run(&[
        "psi", "--m1", "-1", "--m2", "1", "--m3", "1", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_is_deterministic_and_thread_independent() {
    let args = [
        "sweep",
        "--m1",
        "1.5",
        "--m2",
        "0.8,1.1",
        "--m3-points",
        "12",
    ];
    let a = run(&args);
    let b = bin()
        .args(args)
        .env("CASIMIR_ANISO_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# units:"));
    assert_eq!(
        lines.next().unwrap(),
        "m1,m2,m3,psi,psi1,psi2,label,error_estimate"
    );
    assert_eq!(lines.count(), 24);
}

#[test]
fn bad_thread_cap_is_usage_error() {
    let o = bin()
        .args(["psi", "--m1", "1.5", "--m2", "0.8", "--m3", "1"])
        .env("CASIMIR_ANISO_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn border_finds_both_sides_of_middle_region() {
    let o = run(&["border", "--m1", "1.5", "--m2", "0.8", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let stars: Vec<f64> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["m3_star"].as_f64().unwrap())
        .collect();
    assert!(stars.iter().any(|&m| m < 0.8));
    assert!(stars.iter().any(|&m| m > 1.5));
    let o = run(&[
        "border",
        "--m1",
        "1.5",
        "--m2",
        "0.8",
        "--bracket",
        "0.9,1.4",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no sign change in bracket"));
}

#[test]
fn output_file_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.csv");
    let o = run(&["verify", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# units:"));
    assert_eq!(text.lines().filter(|l| l.contains(",PASS,")).count(), 6);
}
