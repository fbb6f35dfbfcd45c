//! End-to-end checks of the `splitwave` binary: exit codes, output files,
//! config precedence, and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn splitwave(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_splitwave"));
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("SPLITWAVE_")) {
        cmd.env_remove(k);
    }
    cmd.args(args)
        .args(["--outdir", dir.to_str().unwrap()])
        .envs(env.iter().copied())
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn converge_writes_reports_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitwave(
        dir.path(),
        &[
            "converge",
            "--symbol",
            "bo",
            "--n",
            "64",
            "--horizon",
            "0.5",
            "--dts",
            "0.1,0.05,0.025,0.0125",
            "--sigmas",
            "0,1",
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("slope_"), "{text}");
    assert!(text.contains("pass=true"), "{text}");
    for name in [
        "converge_godunov_bo.csv",
        "report.txt",
        "loglog_sigma0.dat",
        "loglog_sigma1.dat",
        "plot.gp",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let csv = fs::read_to_string(dir.path().join("converge_godunov_bo.csv")).unwrap();
    assert!(csv.starts_with("dt,sigma,error,admitted\n"), "{csv}");
}

#[test]
fn run_outputs_are_byte_identical_across_reruns() {
    let run = |dir: &Path| {
        let out = splitwave(
            dir,
            &[
                "run", "--symbol", "bo", "--n", "64", "--dt", "0.02", "--horizon", "0.2",
            ],
            &[],
        );
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        assert!(stdout(&out).contains("run complete"), "{}", stdout(&out));
        (
            fs::read(dir.join("trajectory.csv")).unwrap(),
            fs::read(dir.join("final_state.csv")).unwrap(),
        )
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(a.path()), run(b.path()));
}

#[test]
fn invalid_step_size_exits_with_error_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    fs::write(&cfg, "dt=2.0\nhorizon=1.0\n").unwrap();
    let out = splitwave(
        dir.path(),
        &["run", "--config", cfg.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error="), "{}", stderr(&out));
}

#[test]
fn unknown_config_key_is_rejected_with_accepted_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    fs::write(&cfg, "banana=1\n").unwrap();
    let out = splitwave(
        dir.path(),
        &["run", "--config", cfg.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("unknown key `banana`"), "{err}");
    assert!(err.contains("dts"), "{err}");
}

#[test]
fn env_overrides_file_and_flags_override_env() {
    let count_rows = |dir: &Path| {
        fs::read_to_string(dir.join("final_state.csv"))
            .unwrap()
            .lines()
            .count()
            - 1
    };
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    fs::write(&cfg, "n=128\nsymbol=bo\ndt=0.02\nhorizon=0.1\n").unwrap();

    let out = splitwave(
        dir.path(),
        &["run", "--config", cfg.to_str().unwrap()],
        &[("SPLITWAVE_N", "64")],
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert_eq!(count_rows(dir.path()), 64);

    let out = splitwave(
        dir.path(),
        &["run", "--config", cfg.to_str().unwrap(), "--n", "32"],
        &[("SPLITWAVE_N", "64")],
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert_eq!(count_rows(dir.path()), 32);
}

#[test]
fn verify_symbol_reports_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitwave(
        dir.path(),
        &[
            "verify-symbol",
            "--name",
            "whitham",
            "--ximax",
            "20",
            "--samples",
            "128",
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("dissipativity_ok=true"), "{text}");
    assert!(text.contains("symmetry_ok=true"), "{text}");
}

#[test]
fn verify_lemmas_writes_ratio_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitwave(dir.path(), &["verify-lemmas", "--trials", "10"], &[]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(
        report.starts_with("inequality,trials,max_ratio,ratio_stability\n"),
        "{report}"
    );
    assert!(report.contains("commutator,10,"), "{report}");
    assert!(report.contains("pass=true"), "{report}");
}
