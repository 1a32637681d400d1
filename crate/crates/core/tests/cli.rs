use std::fs;
use std::process::{Command, Output};

use hetnet_duda::cli::{CliError, CSV_HEADER};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetnet-duda"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn eval_duda_association() {
    let o = run(&["eval", "table2_pico.cfg", "assoc", "--mode", "duda"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let r = rows(&text);
    assert_eq!(r.len(), 2);
    assert_eq!(r[0][4], "assoc_prob[macro]");
    assert!((r[0][5].parse::<f64>().unwrap() - 0.20).abs() < 1e-9);
    assert!((r[1][5].parse::<f64>().unwrap() - 0.80).abs() < 1e-9);
    assert!(r.iter().all(|row| row[6].is_empty() && row[7].is_empty()));
}

#[test]
fn eval_output_is_byte_stable() {
    let args = ["eval", "table2_femto", "all", "--mode", "cuda_mean"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn eval_huge_threshold_rate_is_tiny() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strict.cfg");
    let text = hetnet_duda::model::builtin_scenario("table2_pico")
        .unwrap()
        .with_tier(0, |t| t.sinr_threshold = 1e6)
        .unwrap()
        .with_tier(1, |t| t.sinr_threshold = 1e6)
        .unwrap()
        .to_scenario_text();
    fs::write(&path, text).unwrap();
    let o = run(&["eval", path.to_str().unwrap(), "rate", "--mode", "duda"]);
    assert_eq!(o.status.code(), Some(0));
    for row in rows(&stdout(&o)) {
        let rate: f64 = row[5].parse().unwrap();
        assert!(rate < 10.0, "{row:?}");
    }
}

#[test]
fn config_errors_exit_one() {
    assert_eq!(run(&["eval", "", "assoc"]).status.code(), Some(1));
    assert_eq!(run(&["eval", "/nonexistent/none.cfg", "assoc"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "ue_intensity = 0.2\nbogus_key = 1\n").unwrap();
    assert_eq!(run(&["eval", path.to_str().unwrap(), "assoc"]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["eval", "table2_pico", ""]).status.code(), Some(1));
    assert_eq!(
        run(&["sweep", "--param", "tier[0].epsilon", "--values", "0.5", "--metric", ""])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["reproduce", "fig9"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn error_kinds_map_to_exit_codes() {
    assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
    assert_eq!(CliError::Numeric("x".into()).exit_code(), 2);
    assert_eq!(CliError::Validation("x".into()).exit_code(), 3);
}

#[test]
fn sweep_rows_are_ordered_by_value_then_mode() {
    let o = run(&[
        "sweep",
        "--param",
        "tier[0].epsilon",
        "--values",
        "0.5:1.0:0.1",
        "--mode",
        "cuda_mean",
        "--metric",
        "total_rate",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 6);
    let values: Vec<f64> = r.iter().map(|row| row[3].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn reproduce_fig2_writes_decreasing_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reproduce", "fig2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "epsilon,se_duda,se_cuda");
    let r = rows(&csv);
    assert_eq!(r.len(), 6);
    for col in [1, 2] {
        let series: Vec<f64> = r.iter().map(|row| row[col].parse().unwrap()).collect();
        assert!(series.windows(2).all(|w| w[1] <= w[0]), "{series:?}");
    }
    let svg = fs::read_to_string(dir.path().join("fig2.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn reproduce_table1_flags_failures_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reproduce", "table1", "--out", dir.path().to_str().unwrap()]);
    let csv = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    let r = rows(&csv);
    assert_eq!(r.len(), 6);
    let any_fail = r.iter().any(|row| row[8] == "FAIL");
    assert_eq!(o.status.code(), Some(if any_fail { 3 } else { 0 }));
}

#[test]
fn validate_is_deterministic() {
    let args = [
        "validate",
        "--config",
        "table2_pico",
        "--mode",
        "duda",
        "--drops",
        "2000",
        "--radius",
        "50",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("summary:"));
}

#[test]
fn validate_with_one_drop_does_not_crash() {
    let o = run(&[
        "validate",
        "--config",
        "table2_pico",
        "--mode",
        "cuda_mean",
        "--drops",
        "1",
        "--radius",
        "50",
    ]);
    assert!(matches!(o.status.code(), Some(0) | Some(3)));
    assert!(stdout(&o).contains("summary:"));
}

#[test]
fn validate_reports_laplace_mismatch_as_failure() {
    let o = run(&[
        "validate",
        "--config",
        "table2_pico",
        "--mode",
        "duda",
        "--drops",
        "20000",
        "--radius",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).lines().any(|l| l.contains("laplace") && l.ends_with("FAIL")));
}
