use std::path::PathBuf;
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn bayesrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bayesrec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("missing {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn solve_prints_matching_oracles() {
    let out = bayesrec(&["solve", configs().join("two_state.toml").to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!((field(&text, "threshold_value") - 0.75).abs() < 1e-12);
    assert!((field(&text, "bruteforce_value") - 0.75).abs() < 1e-9);
}

#[test]
fn missing_instance_fails_with_message() {
    let out = bayesrec(&["solve", "/definitely/not/here.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/not/here.toml"));
}

#[test]
fn decompose_reports_components() {
    let out = bayesrec(&["decompose", "--dist", configs().join("example_dist.toml").to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!((field(&text, "mean") - 0.41).abs() < 1e-12);
    assert_eq!(text.lines().filter(|l| l.starts_with("weight")).count(), 2);
}

#[test]
fn verify_suite_passes_and_unknown_suite_fails() {
    let out = bayesrec(&["verify", "decompose", "--seed", "3"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));
    assert!(!bayesrec(&["verify", "nonsense"]).status.success());
}

#[test]
fn simulate_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = bayesrec(&[
        "simulate",
        "--policy",
        "loglog",
        "--pricing-value",
        "0.3",
        "--horizon",
        "1000",
        "--seeds",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for name in ["per_seed.csv", "aggregate.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().next(), Some("# bayesrec regret-report v1"));
        assert!(text.lines().nth(1).unwrap().starts_with("# policy=loglog master_seed=0 states=2"));
    }
    let per_seed = std::fs::read_to_string(dir.path().join("per_seed.csv")).unwrap();
    assert_eq!(per_seed.lines().count(), 2 + 1 + 3);
}

#[test]
fn simulate_rejects_missing_policy() {
    let out = bayesrec(&["simulate", "--pricing-value", "0.3", "--horizon", "100"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--policy"));
}

#[test]
fn regret_curve_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = bayesrec(&[
        "regret-curve",
        "--config",
        configs().join("loglog_pricing.toml").to_str().unwrap(),
        "--horizons",
        "100,1000",
        "--seeds",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let agg = std::fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 2 + 1 + 2);
}

#[test]
fn lp_solve_converges() {
    let out = bayesrec(&[
        "lp-solve",
        "--halfspace",
        "1,-2",
        "--offset",
        "-0.5",
        "--objective",
        "0,1",
        "--interior",
        "0.5,0.2",
        "--inner-radius",
        "0.05",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("status = Converged"), "{text}");
    // x1 ≤ (x0 + 0.5)/2 peaks at 0.75 when x0 = 1.
    assert!((field(&text, "value") - 0.75).abs() <= 1e-4);
}

#[test]
fn pricing_demo_bound_holds() {
    let out = bayesrec(&["pricing-demo", "--value", "0.3", "--horizon", "1000", "--seeds", "2"]);
    assert!(out.status.success());
    assert!(stdout(&out).trim_end().ends_with("true"));
}
