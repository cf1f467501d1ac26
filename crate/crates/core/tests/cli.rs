//! End-to-end checks of the command-line interface: flags, config files,
//! output schemas, and exit codes (0 success, 1 invariant failure, 2 usage).

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_qteleport")
}

fn run_cli(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn teleport_entangled_is_exact() {
    let out = run_cli(&["teleport", "--model", "entangled", "--input", "1,0"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert_eq!(row[1], "0.25");
        assert_eq!(row[2], "1");
    }
}

#[test]
fn teleport_disentangled_z_dephases() {
    let out = run_cli(&[
        "teleport",
        "--model",
        "disentangled",
        "--theta",
        "0",
        "--input",
        "0.6,0.8",
    ]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    for row in &rows {
        let bob00: f64 = row[3].parse().unwrap();
        let bob01: f64 = row[5].parse().unwrap();
        let bob11: f64 = row[9].parse().unwrap();
        assert!((bob00 - 0.36).abs() < 1e-12);
        assert!(bob01.abs() < 1e-12);
        assert!((bob11 - 0.64).abs() < 1e-12);
    }
}

#[test]
fn teleport_equal_superposition_fidelity_half() {
    let out = run_cli(&[
        "teleport",
        "--model",
        "disentangled",
        "--theta",
        "0",
        "--input",
        "0.7071,0.7071",
    ]);
    assert!(out.status.success());
    for row in csv_rows(&stdout(&out)) {
        let fid: f64 = row[2].parse().unwrap();
        assert!((fid - 0.5).abs() < 1e-8);
    }
}

#[test]
fn verify_passes_by_default() {
    let out = run_cli(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("bell_completeness"));
    assert!(!text.contains("false"));
}

#[test]
fn verify_perturbation_fails_with_exit_1() {
    let out = run_cli(&["verify", "--perturb"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("bell_completeness") && l.ends_with("false")));
}

#[test]
fn verify_impossible_tolerance_reports_residuals() {
    let out = run_cli(&["verify", "--tol", "1e-20"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("false"));
}

#[test]
fn usage_errors_exit_2() {
    let out = run_cli(&["teleport", "--model", "wormhole"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_cli(&["teleport", "--input", "0,0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_cli(&["compare", "--inputs", ""]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_cli(&["--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_default_grid() {
    let out = run_cli(&["compare", "--nodes", "16"]);
    assert!(out.status.success());
    // the input column is quoted and contains commas, so split from the right
    let text = stdout(&out);
    let rows: Vec<(String, Vec<f64>)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("input,"))
        .map(|l| {
            let fields: Vec<&str> = l.rsplitn(5, ',').collect();
            let input = fields[4].trim_matches('"').to_string();
            let nums = fields[..4]
                .iter()
                .rev()
                .map(|s| s.parse().unwrap())
                .collect();
            (input, nums)
        })
        .collect();
    assert!(rows.len() >= 4);
    for (_, nums) in &rows {
        assert!((nums[0] - 1.0).abs() < 1e-10); // entangled
        assert!((nums[3] - 0.5).abs() < 1e-8); // independent-phase average
    }
    // (1,0) survives the z-axis channel, the equal superposition does not
    assert_eq!(rows[0].0, "1,0");
    assert!((rows[0].1[1] - 1.0).abs() < 1e-12);
    let equal = rows
        .iter()
        .find(|(i, _)| i == "0.7071067811865476,0.7071067811865476")
        .unwrap();
    assert!((equal.1[1] - 0.5).abs() < 1e-12);
}

#[test]
fn ensemble_json_output_parses() {
    let out = run_cli(&[
        "ensemble",
        "--phase-model",
        "independent",
        "--nodes",
        "32",
        "--format",
        "json",
        "--input",
        "0.6,0.8",
        "--epsilon",
        "0.1",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema"], "qteleport.ensemble.v1");
    for b in v["branches"].as_array().unwrap() {
        let fid = b["fidelity"].as_f64().unwrap();
        assert!((fid - 0.5).abs() < 1e-10);
    }
    // quadrature grid evaluates the window fraction deterministically
    assert!(v["detection_rate"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_with_cli_override() {
    let dir = std::env::temp_dir().join(format!("qteleport-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let conf: PathBuf = dir.join("t.conf");
    std::fs::write(&conf, "model = entangled\ninput = 1,0\n# comment\n").unwrap();
    let out = Command::new(bin())
        .args(["teleport", "--config"])
        .arg(&conf)
        .args(["--input", "0.6,0.8"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    // override took effect: fidelity still 1 (entangled), bob = input state
    let bob00: f64 = rows[0][3].parse().unwrap();
    assert!((bob00 - 0.36).abs() < 1e-12);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn echo_config_round_trips_through_file() {
    let out = run_cli(&[
        "ensemble",
        "--echo-config",
        "--input",
        "0.6,0.8",
        "--samples",
        "5000",
        "--seed",
        "77",
        "--phase-model",
        "offset:3.141592653589793",
    ]);
    assert!(out.status.success());
    let echoed = stdout(&out);
    let dir = std::env::temp_dir().join(format!("qteleport-echo-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let conf = dir.join("echo.conf");
    std::fs::write(&conf, &echoed).unwrap();
    let out2 = Command::new(bin())
        .args(["ensemble", "--echo-config", "--config"])
        .arg(&conf)
        .output()
        .unwrap();
    assert!(out2.status.success());
    assert_eq!(echoed, stdout(&out2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn identical_seeds_give_identical_csv() {
    let args = [
        "ensemble",
        "--phase-model",
        "matched",
        "--samples",
        "20000",
        "--seed",
        "5",
        "--input",
        "0.6,0.8",
    ];
    let a = run_cli(&args);
    let b = run_cli(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run_cli(&[
        "ensemble",
        "--phase-model",
        "matched",
        "--samples",
        "20000",
        "--seed",
        "6",
        "--input",
        "0.6,0.8",
    ]);
    assert_ne!(a.stdout, c.stdout);
}
