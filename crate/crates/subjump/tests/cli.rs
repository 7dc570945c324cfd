//! End-to-end tests of the `subjump` binary: exit codes, determinism,
//! output round-trips, and option precedence, all through real process
//! invocations of the compiled executable.

use std::path::Path;
use std::process::{Command, Output};

use subjump::report::Report;

/// Invoke the compiled binary with `args`, an optional config/working dir,
/// and a scrubbed environment (no ambient seed unless the test sets one).
fn subjump(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_subjump"));
    cmd.args(args).env_remove("SUBJUMP_SEED");
    for (key, value) in envs {
        cmd.env(key, value);
    }
    cmd.output().expect("failed to spawn subjump")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process killed by signal")
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_report(path: &Path) -> Report {
    let text = std::fs::read_to_string(path).unwrap();
    Report::parse(&text).unwrap()
}

#[test]
fn simulate_emits_unit_interval_rows_that_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("samples.csv");
    let run = subjump(
        &[
            "simulate",
            "--model", "stable(alpha=0.5,c=1)",
            "--stat", "consecutive",
            "--k", "1",
            "--t", "1",
            "--n", "1000",
            "--seed", "7",
            "--out", out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));

    let report = read_report(&out);
    assert_eq!(
        report.columns(),
        ["t", "replicate", "kind", "k", "value", "capped", "degenerate"]
    );
    let values = report.f64_column("value").unwrap();
    assert_eq!(values.len(), 1000);
    assert!(values.iter().all(|v| (0.0..=1.0).contains(v)), "values escape [0,1]");
    assert_eq!(report.require_meta("seed").unwrap(), "7");
    assert_eq!(report.require_meta("degenerate").unwrap(), "0");
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |path: &Path| {
        vec![
            "simulate".to_string(),
            "--model".into(), "stable(alpha=0.5,c=1)".into(),
            "--stat".into(), "consecutive".into(),
            "--k".into(), "1".into(),
            "--t".into(), "1".into(),
            "--n".into(), "200".into(),
            "--seed".into(), "7".into(),
            "--out".into(), path.to_str().unwrap().to_string(),
        ]
    };
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    for path in [&first, &second] {
        let argv: Vec<String> = args(path);
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let run = subjump(&argv, &[]);
        assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    }
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap(),
        "same seed, different bytes"
    );
}

#[test]
fn simulate_counts_degenerate_rows_in_the_footer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("steps.csv");
    let run = subjump(
        &[
            "simulate",
            "--model", "steps(1:1,2:1)",
            "--stat", "consecutive",
            "--k", "1",
            "--t", "1e-3",
            "--n", "200",
            "--seed", "11",
            "--out", out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    let report = read_report(&out);
    // A finite measure at a tiny horizon almost never produces two jumps:
    // nearly every replicate is a 0/0 row, and the footer says so.
    let degenerate: usize = report.require_meta("degenerate").unwrap().parse().unwrap();
    assert!(degenerate > 150, "only {degenerate} of 200 degenerate");
    let flags = report.f64_column("degenerate").unwrap();
    assert_eq!(flags.iter().filter(|f| **f == 1.0).count(), degenerate);
}

#[test]
fn verify_passing_run_exits_zero_and_writes_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.csv");
    let run = subjump(
        &[
            "verify",
            "--theorem", "2",
            "--model", "stable(alpha=0.5,c=1)",
            "--k", "1",
            "--t", "1",
            "--n", "20000",
            "--seed", "7",
            "--out", out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    assert!(stderr_text(&run).contains("all 2 checks passed"));

    let report = read_report(&out);
    assert_eq!(report.require_meta("overall").unwrap(), "pass");
    let results = report.str_column("result").unwrap();
    assert!(results.iter().all(|r| *r == "pass"), "{results:?}");
}

#[test]
fn verify_statistical_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.csv");
    // Score samples from a regular-variation index 0.5 model against the
    // law a declared index of 0.9 prescribes: operationally fine,
    // statistically hopeless.
    let run = subjump(
        &[
            "verify",
            "--theorem", "2",
            "--model", "stable(alpha=0.5,c=1)",
            "--regime", "regvar(alpha=0.9)",
            "--k", "1",
            "--t", "1",
            "--n", "2000",
            "--seed", "7",
            "--out", out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 1, "{}", stderr_text(&run));
    assert!(stderr_text(&run).contains("checks failed"));
    let report = read_report(&out);
    assert_eq!(report.require_meta("overall").unwrap(), "fail");
}

#[test]
fn verify_without_a_known_regime_exits_two_with_guidance() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("data.csv");
    std::fs::write(&table, "0.5,2\n1.5,1\n3,0\n").unwrap();
    let model = format!("table({})", table.to_str().unwrap());
    let run = subjump(
        &[
            "verify",
            "--theorem", "2",
            "--model", &model,
            "--k", "1",
            "--t", "1",
            "--n", "100",
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 2, "{}", stderr_text(&run));
    assert!(
        stderr_text(&run).contains("--regime"),
        "stderr lacks guidance: {}",
        stderr_text(&run)
    );
}

#[test]
fn operational_errors_exit_two() {
    // Unwritable output path.
    let run = subjump(
        &[
            "limits",
            "--law", "betacdf",
            "--alpha", "0.5",
            "--k", "1",
            "--x", "0.25",
            "--out", "/nonexistent-dir/out.csv",
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 2, "{}", stderr_text(&run));
    assert!(stderr_text(&run).contains("/nonexistent-dir/out.csv"));

    // Malformed model expression.
    let run = subjump(
        &[
            "simulate",
            "--model", "stable(alpha=0.5",
            "--stat", "consecutive",
            "--k", "1",
            "--t", "1",
            "--n", "10",
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 2, "{}", stderr_text(&run));

    // Missing required option.
    let run = subjump(&["simulate", "--stat", "consecutive", "--k", "1"], &[]);
    assert_eq!(exit_code(&run), 2, "{}", stderr_text(&run));
    assert!(stderr_text(&run).contains("--model"), "{}", stderr_text(&run));
}

#[test]
fn limits_tabulates_the_closed_form_laws() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gk.csv");
    let run = subjump(
        &[
            "limits",
            "--law", "gk",
            "--alpha", "0.5",
            "--k", "0",
            "--lambda", "0,1,2",
            "--out", out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    let report = read_report(&out);
    let lambdas = report.f64_column("lambda").unwrap();
    let values = report.f64_column("value").unwrap();
    assert_eq!(lambdas, vec![0.0, 1.0, 2.0]);
    assert_eq!(values[0], 1.0);
    assert!((values[1] - 0.19762).abs() < 1e-5, "gk(1) = {}", values[1]);
    assert!(values[2].is_finite() && values[2] < values[1]);

    let out = dir.path().join("beta.csv");
    let run = subjump(
        &[
            "limits",
            "--law", "betacdf",
            "--alpha", "0.5",
            "--k", "1",
            "--x", "0.25",
            "--out", out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    let report = read_report(&out);
    assert_eq!(report.f64_column("value").unwrap(), vec![0.5]);
}

#[test]
fn limits_finite_horizon_cdf_is_horizon_invariant_for_stable_models() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ft.csv");
    let run = subjump(
        &[
            "limits",
            "--law", "finite-t-cdf",
            "--model", "stable(alpha=0.5,c=1)",
            "--k", "1",
            "--t", "0.001,1,1000",
            "--x", "0.5",
            "--out", out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    let report = read_report(&out);
    let values = report.f64_column("value").unwrap();
    assert_eq!(values.len(), 3);
    for v in &values {
        assert!((v - 0.5f64.sqrt()).abs() < 1e-6, "value {v} drifts from √0.5");
    }
}

#[test]
fn classify_emits_a_model_card() {
    let run = subjump(&["classify", "--model", "gamma(rate=1)"], &[]);
    assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    let report = Report::parse(&String::from_utf8_lossy(&run.stdout)).unwrap();
    assert_eq!(report.require_meta("regime-trimmed-sum").unwrap(), "slowvar");
    let ratios = report.f64_column("cond-iii-ratio").unwrap();
    assert_eq!(ratios.len(), 10);
    assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
}

#[test]
fn seed_resolution_prefers_flag_then_config_then_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        "model = stable(alpha=0.5,c=1)\nstat = consecutive\nk = 1\nt = 1\nn = 50\nseed = 3\n",
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let base = |extra: &[&'static str]| {
        let mut argv = vec![
            "simulate",
            "--config", config.to_str().unwrap(),
            "--out", out.to_str().unwrap(),
        ];
        argv.extend_from_slice(extra);
        argv
    };

    // Flag beats config and environment.
    let run = subjump(&base(&["--seed", "5"]), &[("SUBJUMP_SEED", "9")]);
    assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    assert_eq!(read_report(&out).require_meta("seed").unwrap(), "5");

    // Config beats environment.
    let run = subjump(&base(&[]), &[("SUBJUMP_SEED", "9")]);
    assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    assert_eq!(read_report(&out).require_meta("seed").unwrap(), "3");

    // Environment beats the built-in default.
    let no_seed = dir.path().join("noseed.conf");
    std::fs::write(
        &no_seed,
        "model = stable(alpha=0.5,c=1)\nstat = consecutive\nk = 1\nt = 1\nn = 50\n",
    )
    .unwrap();
    let run = subjump(
        &[
            "simulate",
            "--config", no_seed.to_str().unwrap(),
            "--out", out.to_str().unwrap(),
        ],
        &[("SUBJUMP_SEED", "9")],
    );
    assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    assert_eq!(read_report(&out).require_meta("seed").unwrap(), "9");

    // Nothing anywhere: seed 0.
    let run = subjump(
        &[
            "simulate",
            "--config", no_seed.to_str().unwrap(),
            "--out", out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    assert_eq!(read_report(&out).require_meta("seed").unwrap(), "0");
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        "model = stable(alpha=0.5,c=1)\nstat = consecutive\nk = 1\nt = 1\nn = 50\nrel-tol = 1e-3\n",
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let run = subjump(
        &[
            "simulate",
            "--config", config.to_str().unwrap(),
            "--n", "25",
            "--rel-tol", "1e-8",
            "--out", out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    let report = read_report(&out);
    assert_eq!(report.require_meta("n").unwrap(), "25");
    assert_eq!(report.rows().len(), 25);
    let rel_tol: f64 = report.require_meta("rel-tol").unwrap().parse().unwrap();
    assert_eq!(rel_tol, 1e-8);
}

#[test]
fn config_parse_errors_name_the_offending_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.conf");
    std::fs::write(&config, "model = stable(alpha=0.5,c=1)\nbogus = 1\n").unwrap();
    let run = subjump(
        &[
            "simulate",
            "--config", config.to_str().unwrap(),
            "--stat", "consecutive",
            "--k", "1",
            "--t", "1",
            "--n", "10",
        ],
        &[],
    );
    assert_eq!(exit_code(&run), 2, "{}", stderr_text(&run));
    let err = stderr_text(&run);
    assert!(err.contains("bogus") && err.contains("line 2"), "{err}");
}

#[test]
fn verify_summary_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    for path in [&first, &second] {
        let run = subjump(
            &[
                "verify",
                "--theorem", "2",
                "--model", "stable(alpha=0.5,c=1)",
                "--k", "1",
                "--t", "1",
                "--n", "5000",
                "--seed", "13",
                "--out", path.to_str().unwrap(),
            ],
            &[],
        );
        assert_eq!(exit_code(&run), 0, "{}", stderr_text(&run));
    }
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap(),
        "same verify invocation, different summary bytes"
    );
}
