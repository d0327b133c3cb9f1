use std::path::Path;
use std::process::{Command, Output};

fn forcelearn(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forcelearn"))
        .args(args)
        .env("FORCELEARN_OUT", out)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn train_smoke_run_writes_under_env_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let o = forcelearn(
        &["train", "--steps", "100", "--model", "P-14", "--seed", "3"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let run = dir.path().join("P-14-seed3-pen");
    for f in [
        "config.toml",
        "metrics.csv",
        "summary.toml",
        "checkpoints/final.ckpt",
    ] {
        assert!(run.join(f).exists(), "missing {f}");
    }

    let o = forcelearn(
        &["eval", run.to_str().unwrap(), "--episodes", "0"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("episodes 0 successes 0"));

    let svg = dir.path().join("c.svg");
    let o = forcelearn(
        &[
            "plot",
            run.to_str().unwrap(),
            "--output",
            svg.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = forcelearn(&["train", "--model", "P-15"], dir.path());
    assert_eq!(code(&o), 1);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "total_steps = \"many\"\n").unwrap();
    let o = forcelearn(&["train", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("configuration error"));

    let o = forcelearn(&["train", "--steps", "0"], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn runtime_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = forcelearn(
        &["eval", dir.path().join("absent").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&o), 2);

    // a regular file where the run directory must go
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let o = forcelearn(
        &[
            "train",
            "--steps",
            "10",
            "--run-dir",
            blocker.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = forcelearn(&["--help"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("sweep"));
}
