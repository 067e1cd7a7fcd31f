use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ramsey-spectrum"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned(), String::from_utf8_lossy(&out.stderr).into_owned())
}

// (tau, value) pairs from a CSV written by the tool.
fn read_curve(path: &Path) -> Vec<(f64, f64)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("tau,ne_over_n"));
    lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

#[test]
fn signal_methods_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "signal",
        "--n",
        "30",
        "--p",
        "0.7,0.2,0.1",
        "--beta",
        "1.5708",
        "--delta",
        "0",
        "--method",
        "exact,asymptotic",
        "--tau-grid",
        "0:2e-3:200",
        "--out-dir",
        out,
    ];
    let (code, _, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    let exact = read_curve(&dir.path().join("signal_exact.csv"));
    let asym = read_curve(&dir.path().join("signal_asymptotic.csv"));
    assert_eq!(exact.len(), 200);
    assert!(exact[0].1.abs() < 1e-12);
    let dev = exact.iter().zip(&asym).map(|(a, b)| (a.1 - b.1).abs()).fold(0.0, f64::max);
    assert!(dev > 1e-4 && dev < 0.3, "{dev}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("signal_exact.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["n"], 30);
    assert_eq!(json["curve"]["method"], "exact");
    let first = fs::read_to_string(dir.path().join("signal_exact.csv")).unwrap();
    assert!(first.starts_with("# config: {"));

    // Same config, same bytes.
    let before = fs::read(dir.path().join("signal_exact.csv")).unwrap();
    run(&args);
    assert_eq!(before, fs::read(dir.path().join("signal_exact.csv")).unwrap());
}

#[test]
fn signal_special_cases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, ..) =
        run(&["signal", "--n", "12", "--p", "0.6,0.4", "--beta", "3.141592653589793", "--tau-grid", "0:0.1:20", "--out-dir", out, "--prefix", "pi"]);
    assert_eq!(code, 0);
    assert!(read_curve(&dir.path().join("pi_exact.csv")).iter().all(|(_, v)| v.abs() < 1e-12));

    let (code, ..) = run(&[
        "signal",
        "--n",
        "6",
        "--p",
        "1,0",
        "--beta",
        "1.2",
        "--delta",
        "3",
        "--U",
        "2",
        "--tau-grid",
        "0:0.1:20",
        "--out-dir",
        out,
        "--prefix",
        "pure",
    ]);
    assert_eq!(code, 0);
    let amp = 0.5 * 1.2f64.sin().powi(2);
    for (t, v) in read_curve(&dir.path().join("pure_exact.csv")) {
        assert!((v - amp * (1.0 - (3.0 * t).cos())).abs() < 1e-12);
    }
}

#[test]
fn signal_all_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, err) = run(&["signal", "--n", "4", "--p", "0.7,0.3", "--method", "all", "--tau-grid", "0:0.1:10", "--out-dir", out]);
    assert_eq!(code, 0, "{err}");
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("signal_deviations.json")).unwrap()).unwrap();
    assert!(summary["max_abs_deviation"]["oracle"].as_f64().unwrap() < 1e-9);
    assert_eq!(summary["max_abs_deviation"]["exact"].as_f64().unwrap(), 0.0);
    for m in ["exact", "truncated", "asymptotic", "meanfield-ode", "oracle"] {
        assert!(dir.path().join(format!("signal_{m}.csv")).exists(), "{m}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["signal", "--p", "0.7,0.7", "--out-dir", out]).0, 2);
    assert_eq!(run(&["signal", "--tau-grid", "0:1", "--out-dir", out]).0, 2);
    assert_eq!(run(&["signal", "--n", "10", "--p", "0.5,0.3,0.2", "--method", "oracle", "--out-dir", out]).0, 3);
    assert_eq!(run(&["estimate", "--n", "10", "--tau-grid", "0:0.1:2", "--out-dir", out]).0, 2);
    assert_eq!(run(&["physical", "--omega-perp", "0"]).0, 2);
}

#[test]
fn eyd_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, ..) = run(&["eyd", "--n", "6", "--p", "0.5,0.3,0.2", "--energies", "--out-dir", out]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("eyd.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 7);
    let twelve = rows.iter().filter(|r| r.ends_with(&format!(",{:.16e}", 12.0))).count();
    assert_eq!(twelve, 2);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("eyd.json")).unwrap()).unwrap();
    assert_eq!(json["distribution"]["entries"].as_array().unwrap().len(), 7);

    let (code, ..) = run(&["eyd", "--n", "1", "--p", "0.8,0.2", "--out-dir", out, "--prefix", "one"]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("one.csv")).unwrap();
    assert_eq!(text.lines().nth(1), Some("lambda,prob,S,p_estimate"));
    assert!(text.lines().nth(2).unwrap().starts_with("1 0,1.0000000000000000e0"));
}

#[test]
fn estimate_round_trip_and_records_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["estimate", "--n", "8", "--p", "0.75,0.25", "--tau-grid", "0.05:0.05:30", "--shots", "400", "--seed", "3", "--out-dir", out];
    let (code, _, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    let result: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("estimate.json")).unwrap()).unwrap();
    let p0 = result["result"]["p_hat"][0].as_f64().unwrap();
    assert!((p0 - 0.75).abs() < 0.05, "{p0}");
    assert_eq!(result["config"]["seed"], 3);

    let records = dir.path().join("estimate_records.csv");
    let (code, ..) = run(&[
        "estimate",
        "--n",
        "8",
        "--p",
        "0.5,0.5",
        "--tau-grid",
        "0.05:0.05:30",
        "--records",
        records.to_str().unwrap(),
        "--out-dir",
        out,
        "--prefix",
        "again",
    ]);
    assert_eq!(code, 0);
    let again: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("again.json")).unwrap()).unwrap();
    assert!((again["result"]["p_hat"][0].as_f64().unwrap() - p0).abs() < 1e-9);
    assert!(dir.path().join("again_residuals.csv").exists());
}

#[test]
fn physical_units() {
    let (code, stdout, _) = run(&["physical"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let u = v["couplings"]["u_gg"].as_f64().unwrap();
    assert!((u - 4.0 * std::f64::consts::PI * 5.1e-9 * 2.0 * std::f64::consts::PI * 1e4 / 1e-5).abs() < 1e-9);
    let (_, stdout, _) = run(&["physical", "--L", "2e-5"]);
    let v2: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!((v2["couplings"]["u_gg"].as_f64().unwrap() - u / 2.0).abs() < 1e-9);
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (code, first, _) = run(&["--print-config", "signal", "--n", "7", "--p", "0.6,0.4", "--delta", "-0.5", "--method", "exact,oracle"]);
    assert_eq!(code, 0);
    let path = dir.path().join("c.json");
    fs::write(&path, &first).unwrap();
    let (_, second, _) = run(&["--print-config", "--config", path.to_str().unwrap(), "signal"]);
    assert_eq!(first, second);
    let (_, third, _) = run(&["--print-config", "--config", path.to_str().unwrap(), "signal", "--n", "9"]);
    let v: serde_json::Value = serde_json::from_str(&third).unwrap();
    assert_eq!((v["n"].as_u64(), v["delta"].as_f64()), (Some(9), Some(-0.5)));
}

#[test]
fn validate_quick_reports_each_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = run(&["validate", "--quick", "--out-dir", out]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("validate_report.json")).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        for key in ["check", "status", "max_error", "runtime"] {
            assert!(c.get(key).is_some(), "{key}");
        }
    }
    let failing: Vec<u64> = checks.iter().filter(|c| c["status"] == "fail").map(|c| c["id"].as_u64().unwrap()).collect();
    // The quoted physical coupling is the one check the formula cannot meet.
    assert_eq!(failing, vec![12], "{stdout}");
    assert_eq!(code, 1);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), checks.len());
}
