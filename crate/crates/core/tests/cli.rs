mod common;

use std::path::PathBuf;

use common::{kv, run_bin};

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const NOMINAL: [&str; 4] = ["--gamma-s-db", "6", "--gamma-w-db", "2"];

fn with_nominal<'a>(cmd: &'a str, rest: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend(NOMINAL);
    v.extend(rest);
    v
}

#[test]
fn rates_at_the_operating_point() {
    let o = run_bin(&with_nominal(
        "rates",
        &[
            "--alpha-c",
            "0.689",
            "--lambda",
            "0.99",
            "--tau",
            "0.1",
            "--beta",
            "0",
        ],
    ));
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(kv(&out, "r_rsma_s").unwrap() > kv(&out, "r_oma_s").unwrap());
    assert!(kv(&out, "r_rsma_w").unwrap() > kv(&out, "r_oma_w").unwrap());
    for line in out.lines() {
        assert!(line.contains(" = ") || line.ends_with(" ="), "{line}");
    }
}

#[test]
fn rates_rejects_weak_above_strong() {
    let o = run_bin(&[
        "rates",
        "--gamma-s-db",
        "2",
        "--gamma-w-db",
        "6",
        "--alpha-c",
        "0.689",
        "--lambda",
        "0.99",
        "--tau",
        "0.1",
        "--beta",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate_pair"));
    assert!(stdout(&o).is_empty());
}

#[test]
fn rates_from_scenario_files() {
    let json = scenarios().join("fig7.json");
    let o = run_bin(&["rates", "--scenario", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(kv(&out, "beta"), Some(0.05));
    assert!(kv(&out, "sum_rsma").unwrap() > kv(&out, "sum_oma").unwrap());

    // flags override the file
    let toml = scenarios().join("nominal.toml");
    let o = run_bin(&[
        "rates",
        "--scenario",
        toml.to_str().unwrap(),
        "--beta",
        "0.05",
    ]);
    assert_eq!(stdout(&o), out);
}

#[test]
fn rates_reports_bad_files_as_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "gamma_s_db = 6.0\ngamma_w_db = \"two\"\n").unwrap();
    let o = run_bin(&["rates", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run_bin(&["rates", "--scenario", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bounds_at_the_nominal_point() {
    let o = run_bin(&with_nominal(
        "bounds",
        &["--lambda", "0.99", "--alpha-c", "0.689"],
    ));
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!((kv(&out, "alpha_interval_lower").unwrap() - 0.683).abs() <= 0.001);
    assert!((kv(&out, "alpha_interval_upper").unwrap() - 0.776).abs() <= 0.001);
    assert!((kv(&out, "lambda_strict_lower").unwrap() - 0.865).abs() <= 0.001);
    assert!(kv(&out, "tau_lower").unwrap() < 0.1 && 0.1 < kv(&out, "tau_upper").unwrap());
    for k in [
        "cubic.c3",
        "cubic.c2",
        "cubic.c1",
        "cubic.c0",
        "alpha_lb",
        "alpha_soft_ub",
        "lambda_soft_lower",
    ] {
        assert!(kv(&out, k).is_some(), "{k}");
    }
}

#[test]
fn bounds_without_feasible_lambda_exits_4() {
    let o = run_bin(&[
        "bounds",
        "--gamma-s-db",
        "30",
        "--gamma-w-db",
        "0",
        "--beta",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("lambda_strict_lower =\n"));
    let err = stderr(&o);
    assert!(err.contains("error.kind = no_feasible_lambda"));
    assert!(err.contains("error.exit_code = 4"));
}

#[test]
fn select_prints_parameters_bounds_and_rates() {
    let o = run_bin(&with_nominal("select", &["--beta", "0"]));
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let (a, lb, ub) = (
        kv(&out, "alpha_c").unwrap(),
        kv(&out, "alpha_interval_lower").unwrap(),
        kv(&out, "alpha_interval_upper").unwrap(),
    );
    assert!(lb < a && a < ub);
    assert!(out.contains("both_users_gain = true"));

    let o = run_bin(&[
        "select",
        "--gamma-s-db",
        "30",
        "--gamma-w-db",
        "0",
        "--beta",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn sweep_to_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig7.csv");
    let o = run_bin(&["sweep", "--preset", "fig7", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let file = std::fs::read(&path).unwrap();
    assert_eq!(file, run_bin(&["sweep", "--preset", "fig7"]).stdout);
    let text = String::from_utf8(file).unwrap();
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn sweep_from_spec_file() {
    let spec = scenarios().join("fig6.toml");
    let a = run_bin(&["sweep", "--spec", spec.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, run_bin(&["sweep", "--preset", "fig6"]).stdout);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "outputs = []\n[scenario]\ngamma_s_db = 6.0\ngamma_w_db = 2.0\n",
    )
    .unwrap();
    let o = run_bin(&["sweep", "--spec", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let o = run_bin(&with_nominal("verify", &["--beta", "0"]));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("result = pass"));

    let o = run_bin(&with_nominal("verify", &["--perturb-tau-lower", "0.01"]));
    assert_eq!(o.status.code(), Some(5));
    let out = stdout(&o);
    assert!(kv(&out, "mismatch_count").unwrap() > 0.0);
    assert_eq!(
        out.lines().filter(|l| l.starts_with("mismatch.")).count(),
        10
    );

    let o = run_bin(&with_nominal("verify", &["--grid-step", "0.1"]));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("grid_too_coarse"));
}

#[test]
fn output_is_deterministic() {
    let args = with_nominal("bounds", &["--lambda", "0.95"]);
    assert_eq!(run_bin(&args).stdout, run_bin(&args).stdout);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run_bin(&[]).status.code(), Some(2));
    assert_eq!(run_bin(&["rates", "--alpha-c", "x"]).status.code(), Some(2));
    assert_eq!(run_bin(&["--help"]).status.code(), Some(0));
}
