use std::path::Path;
use std::process::{Command, Output};

fn csm(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_csm"));
    cmd.args(args).env_remove("CSM_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run_small(out: &Path, extra: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut args = vec![
        "run",
        "--preset",
        "small",
        "--rounds",
        "2",
        "--epochs",
        "3",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    csm(&args, envs)
}

#[test]
fn run_summarize_plotdata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let res = run_small(&out, &[], &[]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("proposed/weight1") && stdout.contains("sgg"));

    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("round,epoch,algorithm,weight_scheme,observed,objective,connected,deviation_m,solve_s")
    );
    assert_eq!(lines.count(), 2 * 3 * 3);

    let res = csm(&["summarize", out.join("results.csv").to_str().unwrap()], &[]);
    assert!(res.status.success());
    assert_eq!(String::from_utf8(res.stdout).unwrap(), stdout);

    let plots = dir.path().join("plots");
    let res = csm(
        &["plotdata", out.join("results.csv").to_str().unwrap(), "--out", plots.to_str().unwrap()],
        &[],
    );
    assert!(res.status.success());
    let bars = std::fs::read_to_string(plots.join("bars.csv")).unwrap();
    assert_eq!(bars.lines().count(), 1 + 3 * 3);
    assert_eq!(
        std::fs::read(plots.join("network.csv")).unwrap(),
        std::fs::read(out.join("network.csv")).unwrap()
    );
}

#[test]
fn seed_precedence_flag_env_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    std::fs::write(&cfg, "preset = small\nrounds = 1\nepochs = 2\nseed = 5\n").unwrap();
    let read = |name: &str, extra: &[&str], envs: &[(&str, &str)]| {
        let out = dir.path().join(name);
        let mut args = vec!["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let res = csm(&args, envs);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        std::fs::read(out.join("results.csv")).unwrap()
    };
    let file5 = read("a", &[], &[]);
    let env5 = read("b", &[], &[("CSM_SEED", "5")]);
    let env6 = read("c", &[], &[("CSM_SEED", "6")]);
    let flag5 = read("d", &["--seed", "5"], &[("CSM_SEED", "6")]);
    assert_eq!(file5, env5);
    assert_ne!(file5, env6);
    assert_eq!(file5, flag5);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run_small(&a, &["--seed", "11"], &[]).status.success());
    assert!(run_small(&b, &["--seed", "11"], &[]).status.success());
    for f in ["results.csv", "network.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    for extra in [
        &["--algo", "teleport"][..],
        &["--weight-scheme", "weight9"][..],
        &["--set", "comm_radius=-3"][..],
        &["--set", "nonsense=1"][..],
    ] {
        let res = run_small(&out, extra, &[]);
        assert_eq!(res.status.code(), Some(2), "{extra:?}");
        assert!(String::from_utf8_lossy(&res.stderr).contains("error"));
    }
    let res = run_small(&out, &[], &[("CSM_SEED", "abc")]);
    assert_eq!(res.status.code(), Some(2));
    let res = csm(&["run", "--preset", "giant", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_plain_failure() {
    let res = csm(&["summarize", "/nonexistent/results.csv"], &[]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn check_command_passes() {
    let res = csm(&["check", "--seed", "3"], &[]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
