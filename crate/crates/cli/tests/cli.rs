use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cgrpo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgrpo"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const TINY: &str = "iterations = 2\nbatch_timesteps = 100\nalpha0 = 0.01\nhidden_sizes = 16,16\n";

#[test]
fn minimal_train_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.txt",
        "iterations = 1\nnum_policies = 1\nnum_groups = 1\nbatch_timesteps = 100\n",
    );
    let out_dir = dir.path().join("run");
    let out = cgrpo(&["train", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("iteration,policy_index,mean_return"));
    assert!(out_dir.join("final.ckpt").exists());
    assert!(!out_dir.join("checkpoints").exists());
    let svg = fs::read_to_string(out_dir.join("training_curve.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("<circle"));

    let eval = cgrpo(&[
        "eval",
        "--checkpoint",
        out_dir.join("final.ckpt").to_str().unwrap(),
        "--episodes",
        "2",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&eval), 0);
    let again = cgrpo(&[
        "eval",
        "--checkpoint",
        out_dir.join("final.ckpt").to_str().unwrap(),
        "--episodes",
        "2",
        "--seed",
        "1",
    ]);
    assert_eq!(eval.stdout, again.stdout);
    assert!(String::from_utf8_lossy(&eval.stdout).contains("policy 1:"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&cgrpo(&["train", "--config", missing.to_str().unwrap()])), 3);
    assert_eq!(code(&cgrpo(&["train"])), 1);
    assert_eq!(code(&cgrpo(&["frobnicate"])), 1);

    let bad = write_config(dir.path(), "bad.txt", "gamma = 1.5\n");
    let out = cgrpo(&["train", "--config", &bad]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));

    let unknown = write_config(dir.path(), "unknown.txt", "gamma = 0.9\nwibble = 2\n");
    let out = cgrpo(&["train", "--config", &unknown]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let ckpt = dir.path().join("none.ckpt");
    assert_eq!(
        code(&cgrpo(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--episodes", "0", "--seed", "1"])),
        1
    );
    assert_eq!(
        code(&cgrpo(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--episodes", "1", "--seed", "1"])),
        3
    );
}

#[test]
fn divergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "div.txt",
        "iterations = 3\nbatch_timesteps = 100\nalpha0 = 1e300\ngrad_clip = 1e300\nlr_decay = 0\n",
    );
    let out_dir = dir.path().join("run");
    let out = cgrpo(&["train", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(report.contains("\"divergence\": \"training diverged at iteration 1"));
}

#[test]
fn resume_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.txt", &format!("{TINY}checkpoint_every = 1\n"));
    let full = dir.path().join("full");
    assert_eq!(code(&cgrpo(&["train", "--config", &cfg, "--out", full.to_str().unwrap()])), 0);

    let part = dir.path().join("part");
    let one = write_config(dir.path(), "one.txt", &format!("{TINY}checkpoint_every = 1\niterations = 1\n"));
    assert_eq!(code(&cgrpo(&["train", "--config", &one, "--out", part.to_str().unwrap()])), 0);
    let out = cgrpo(&[
        "train",
        "--config",
        &cfg,
        "--out",
        part.to_str().unwrap(),
        "--resume",
        part.join("final.ckpt").to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(full.join("metrics.csv")).unwrap(),
        fs::read(part.join("metrics.csv")).unwrap()
    );

    let other = write_config(dir.path(), "other.txt", &format!("{TINY}seed = 9\n"));
    let out = cgrpo(&[
        "train",
        "--config",
        &other,
        "--out",
        part.to_str().unwrap(),
        "--resume",
        part.join("final.ckpt").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);

    let svg = dir.path().join("curve.svg");
    let out = cgrpo(&[
        "plot",
        "--csv",
        full.join("metrics.csv").to_str().unwrap(),
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<polyline").count(), 2);

    let bad_csv = write_config(dir.path(), "bad.csv", "iteration,policy_index\n1,0\n");
    assert_eq!(
        code(&cgrpo(&["plot", "--csv", &bad_csv, "--out", svg.to_str().unwrap()])),
        1
    );
}

#[test]
fn compare_two_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.txt", TINY);
    let out_dir = dir.path().join("cmp");
    let out = cgrpo(&[
        "compare",
        "--config",
        &cfg,
        "--seeds",
        "1,2",
        "--out",
        out_dir.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("/2 (win rate"));
    for cell in ["seed1_full", "seed1_simple", "seed2_full", "seed2_simple"] {
        assert!(out_dir.join(cell).join("metrics.csv").exists(), "{cell}");
    }
    assert!(out_dir.join("compare.json").exists());
    assert_eq!(code(&cgrpo(&["compare", "--config", &cfg, "--seeds", "1"])), 1);
}
