use gggp_cli::{execute, format_number, Invocation, EXIT_NUMERICAL, EXIT_OK, EXIT_SUITE, EXIT_VALIDATION};
use proptest::prelude::*;
use serde_json::Value;

fn run(args: &[&str]) -> Invocation {
    execute(std::iter::once("gggp").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> Value {
    let r = run(args);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn threshold_reports_baselines_and_metadata() {
    let r = json(&["--row", "3", "threshold", "--n-samples", "200000"]);
    assert_eq!(r["result"]["tau_star"], 10);
    assert_eq!(r["result"]["tau_omni"], 3.0);
    assert_eq!(r["result"]["tau_ce"], 17);
    assert_eq!(r["seed"], 42);
    assert_eq!(r["n_samples"], 200000);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["params"]["g"], 3.0);
}

#[test]
fn threshold_flags_gain_below_critical() {
    let r = json(&["--row", "1", "--g", "0.2", "--n", "10", "threshold", "--n-samples", "20000"]);
    assert_eq!(r["result"]["condition_holds"], false);
    assert_eq!(r["result"]["critical_gain_regime"], "finite");
    assert!(r["result"]["tau_star"].is_u64());
}

#[test]
fn threshold_csv_has_header() {
    let r = run(&["--row", "1", "threshold", "--format", "csv", "--n-samples", "20000"]);
    let lines = data_lines(&r.stdout);
    assert_eq!(lines[0], "tau_star,potential,stderr,tau_omni,tau_ce,critical_gain,condition_holds");
    assert_eq!(lines.len(), 2);
}

#[test]
fn potential_curve_matches_threshold() {
    let r = run(&["--row", "1", "potential", "--format", "csv", "--n-samples", "100000"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.contains("# seed=42\n") && r.stdout.contains("# n_samples=100000\n"));
    let lines = data_lines(&r.stdout);
    assert_eq!(lines[0], "tau,value,stderr,is_argmax");
    assert_eq!(lines.len(), 52);
    let marked: Vec<&str> = lines[1..].iter().filter(|l| l.ends_with(",1")).copied().collect();
    assert_eq!(marked.len(), 1);
    let argmax: u64 = marked[0].split(',').next().unwrap().parse().unwrap();
    let t = json(&["--row", "1", "threshold", "--n-samples", "100000"]);
    assert_eq!(t["result"]["tau_star"], argmax);
}

#[test]
fn reduced_samples_are_flagged() {
    let r = json(&["table", "--n-samples", "10000"]);
    assert_eq!(r["result"]["reduced_samples"], true);
    assert!(r["result"]["tau_star_tolerance"].as_u64().unwrap() > 1);
    assert_eq!(r["result"]["rows"].as_array().unwrap().len(), 9);
}

#[test]
fn dynamics_examples() {
    let r = json(&["--row", "2", "--n", "3", "dynamics", "--n-samples", "100000"]);
    assert_eq!(r["result"]["converged"], true);
    assert_eq!(r["result"]["verdict"], "PASS");

    // Below the two-agent critical gain 11/51 nobody activates.
    let r = json(&["--row", "1", "--g", "0.1", "--n", "2", "dynamics", "--init", "never", "--n-samples", "10000"]);
    assert_eq!(r["result"]["converged"], true);
    assert_eq!(r["result"]["rounds"], 1);
    assert_eq!(r["result"]["profile"]["taus"], serde_json::json!(["never", "never"]));

    let r = run(&["--row", "2", "--n", "3", "dynamics", "--max-rounds", "1", "--no-mc-audit"]);
    assert_eq!(r.code, EXIT_NUMERICAL);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["result"]["converged"], false);
    assert_eq!(v["result"]["trace"].as_array().unwrap().len(), 1);
}

#[test]
fn dynamics_accepts_explicit_profiles() {
    let r = json(&["--row", "2", "--n", "3", "dynamics", "--init", "0,inf,never", "--no-mc-audit"]);
    assert_eq!(r["result"]["initial"]["taus"], serde_json::json!([0, "inf", "never"]));
    assert_eq!(run(&["--row", "2", "--n", "3", "dynamics", "--init", "0,1"]).code, EXIT_VALIDATION);
    assert_eq!(run(&["--row", "2", "--n", "3", "dynamics", "--init", "always"]).code, EXIT_VALIDATION);
    let high = json(&["--row", "2", "--p", "-1", "--n", "2", "dynamics", "--init", "always", "--no-mc-audit"]);
    assert_eq!(high["result"]["initial"], serde_json::json!({"kind": "high", "taus": ["always", "always"]}));
    assert_eq!(run(&["--row", "2", "--n", "33", "dynamics"]).code, EXIT_VALIDATION);
    assert_eq!(run(&["--row", "2", "dynamics"]).code, EXIT_VALIDATION);
}

#[test]
fn check_exit_codes() {
    let r = run(&["check", "--suite", "monotonicity", "--inject-cost-sign-flip"]);
    assert_eq!(r.code, EXIT_SUITE);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["result"]["suites"][0]["passed"], false);

    let v = json(&["check", "--suite", "potential"]);
    let suites = v["result"]["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["name"], "potential");
    assert_eq!(run(&["check", "--suite", "nope"]).code, EXIT_VALIDATION);
}

#[test]
fn validation_errors_exit_one() {
    assert_eq!(run(&["--k", "1", "threshold"]).code, EXIT_VALIDATION);
    assert_eq!(run(&["--row", "1", "--theta", "-1", "threshold"]).code, EXIT_VALIDATION);
    assert_eq!(run(&["--row", "1", "--p", "-1", "threshold"]).code, EXIT_VALIDATION);
    assert_eq!(run(&["--row", "1", "threshold", "--n-samples", "10"]).code, EXIT_VALIDATION);
    assert_eq!(run(&["--row", "10", "threshold"]).code, EXIT_VALIDATION);
    assert_eq!(run(&["--row", "1", "table"]).code, EXIT_VALIDATION);
    assert_eq!(run(&["frobnicate"]).code, EXIT_VALIDATION);
    assert_eq!(run(&["--help"]).code, EXIT_OK);
}

#[test]
fn params_file_with_inline_override() {
    let dir = std::env::temp_dir().join(format!("gggp-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("params.json");
    std::fs::write(&file, r#"{"k": 1, "theta": 1.0, "lambda": 5.0, "p": 1, "g": 2.0, "n_agents": "inf"}"#).unwrap();
    let out = dir.join("report.json");
    let f = file.to_str().unwrap();
    let o = out.to_str().unwrap();
    let r = run(&["--params", f, "--g", "3", "threshold", "--n-samples", "20000", "--out", o]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["params"]["g"], 3.0);
    assert_eq!(v["result"]["tau_ce"], 17);

    std::fs::write(&file, r#"{"k": 1, "bogus": 2}"#).unwrap();
    assert_eq!(run(&["--params", f, "threshold"]).code, EXIT_VALIDATION);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_gggp");
    let status = std::process::Command::new(bin).args(["--k", "1", "threshold"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_VALIDATION));
    let ok = std::process::Command::new(bin).args(["check", "--suite", "nash", "--format", "csv"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8(ok.stdout).unwrap().contains("suite,passed,checks,violations,first_failure\nnash,true,"));
}

proptest! {
    #[test]
    fn formatted_numbers_round_trip(v in prop::num::f64::NORMAL) {
        let s = format_number(v);
        prop_assert!(!s.contains(','));
        let back: f64 = s.parse().unwrap();
        prop_assert!(((back - v) / v).abs() < 1e-11, "{v} -> {s}");
    }
}
