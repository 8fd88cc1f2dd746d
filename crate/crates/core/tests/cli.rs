use std::path::Path;
use std::process::{Command, Output};

fn fringe(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fringe"))
        .args(args)
        .current_dir(cwd)
        .env_remove("FRINGE_SEED")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn synth_writes_profile_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = fringe(&["synth", "--thickness-nm", "0"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("pixel,x_m,intensity"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.0, 1.0]);
    assert_eq!(text.lines().count(), 1001);
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!((last[1] - 999.0 * 2e-6).abs() < 1e-15);
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fringe(&[], dir.path()).status.code(), Some(1));
    assert_eq!(fringe(&["synth"], dir.path()).status.code(), Some(1));
    assert_eq!(fringe(&["dataset", "--kind", "validation"], dir.path()).status.code(), Some(1));
    assert_eq!(fringe(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn missing_input_exits_2_naming_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = fringe(&["train", "--data", "nope.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nope.csv"));
}

#[test]
fn numeric_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = fringe(&["synth", "--thickness-nm", "-5"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let out = fringe(&["dataset", "--kind", "test", "--bit-depth", "0"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn bad_config_line_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.conf"), "noise.seed = 3\ntrain.learning_rate = fast\n").unwrap();
    let out = fringe(&["run", "--config", "c.conf"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn unwritable_output_dir_fails_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let target = "blocker/run";
    let out = fringe(&["run", "--out", target], dir.path());
    assert_ne!(out.status.code(), Some(0));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(target), "{}", stderr(&out));
}

#[test]
fn subcommands_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ok = |args: &[&str]| {
        let o = fringe(args, d);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        o
    };
    ok(&["dataset", "--kind", "train", "--out", "train.csv"]);
    ok(&["dataset", "--kind", "test", "--bit-depth", "10", "--seed", "5", "--out", "test.csv"]);
    ok(&["train", "--data", "train.csv", "--out", "model.txt"]);
    let eval = ok(&["eval", "--model", "model.txt", "--data", "test.csv", "--bit-depth", "10", "--out", "ev"]);
    assert!(String::from_utf8_lossy(&eval.stdout).contains("rms_argmax"));
    for f in ["ev.json", "ev.csv", "ev.svg"] {
        assert!(d.join(f).is_file(), "{f}");
    }
    ok(&["plot", "--report", "ev.json", "--out", "replot"]);
    assert_eq!(std::fs::read(d.join("ev.csv")).unwrap(), std::fs::read(d.join("replot.csv")).unwrap());
    assert_eq!(std::fs::read(d.join("ev.svg")).unwrap(), std::fs::read(d.join("replot.svg")).unwrap());
}

#[test]
fn seed_sources_follow_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |env: Option<&str>, args: &[&str], out: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_fringe"));
        cmd.args(["dataset", "--kind", "test", "--out", out]).args(args).current_dir(d).env_remove("FRINGE_SEED");
        if let Some(v) = env {
            cmd.env("FRINGE_SEED", v);
        }
        assert!(cmd.status().unwrap().success());
        std::fs::read(d.join(out)).unwrap()
    };
    let env9 = run(Some("9"), &[], "a.csv");
    let flag9 = run(None, &["--seed", "9"], "b.csv");
    let both = run(Some("1"), &["--seed", "9"], "c.csv");
    let default = run(None, &[], "d.csv");
    std::fs::write(d.join("s.conf"), "noise.seed = 9\n").unwrap();
    let conf = run(Some("1"), &["--config", "s.conf"], "e.csv");
    assert_eq!(env9, flag9);
    assert_eq!(flag9, both);
    assert_eq!(flag9, conf);
    assert_ne!(flag9, default);
}
