//! End-to-end CLI checks: config validation and exit codes, CSV schemas,
//! and byte-identical reproducibility across thread counts.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kraichnan"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const TRAJECTORY_CONFIG: &str = r#"
experiment = "gamma-trajectory"
seed = 42

[kernel]
family = "constant"
rho0 = 1.0

[params]
nu = 1e-4

[trajectory]
horizon = 200.0
n-points = 200
nu2-factor = 0.14
"#;

#[test]
fn rejects_missing_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        r#"
experiment = "walsh-check"
[kernel]
family = "constant"
rho0 = 1.0
"#,
    );
    let out = bin()
        .args(["walsh-check", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        r#"
experiment = "walsh-check"
seed = 1
not-a-real-key = 7
"#,
    );
    let out = bin()
        .args(["walsh-check", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rejects_experiment_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "traj.toml", TRAJECTORY_CONFIG);
    let out = bin()
        .args(["walsh-check", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn walsh_check_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "walsh.toml",
        r#"
experiment = "walsh-check"
seed = 7

[kernel]
family = "gaussian-bell"
rho0 = 1.0
length-scale = 0.7

[grid]
x-min = -4.0
x-max = 4.0
n-x = 33
horizon = 1.0
n-steps = 20

[walsh]
phi = "gaussian-bump"
n-seeds = 2000
"#,
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["walsh-check", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let csv = fs::read_to_string(out_dir.join("walsh-check.csv")).unwrap();
    assert!(csv.starts_with("empirical,analytic,stderr,n_seeds\n"));
    let manifest = fs::read_to_string(out_dir.join("walsh-check-manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 7"));
    assert!(manifest.contains("config-hash"));
}

/// Identical config + seed must give byte-identical CSVs at 1 vs 4
/// threads (wall time lives only in the manifest).
#[test]
fn outputs_are_thread_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "traj.toml", TRAJECTORY_CONFIG);
    let fk_cfg = write(
        dir.path(),
        "fk.toml",
        r#"
experiment = "fk-solve"
seed = 11

[kernel]
family = "gaussian-bell"
rho0 = 1.0
length-scale = 1.0

[params]
nu1 = 1.0
nu2 = 1.0

[sampling]
n-samples = 4000

[solve]
solver = "ito"
mode = "unconditional"
times = [0.5, 1.0]
x = 0.0
y = 0.2

[solve.profile]
shape = "y-gaussian"
sigma = 1.0
"#,
    );
    let mut outputs = Vec::new();
    for (threads, sub) in [("1", "a"), ("4", "b")] {
        let out_dir = dir.path().join(sub);
        for (name, cfg_path) in [("gamma-trajectory", &cfg), ("fk-solve", &fk_cfg)] {
            let out = bin()
                .args([name, "--config"])
                .arg(cfg_path)
                .args(["--threads", threads, "--out"])
                .arg(&out_dir)
                .output()
                .unwrap();
            assert_eq!(out.status.code(), Some(0), "{name}: {out:?}");
        }
        let traj = fs::read(out_dir.join("gamma-trajectory.csv")).unwrap();
        let fk = fs::read(out_dir.join("fk-solve.csv")).unwrap();
        outputs.push((traj, fk));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "trajectory CSV differs");
    assert_eq!(outputs[0].1, outputs[1].1, "fk CSV differs");
}

#[test]
fn seed_override_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "traj.toml", TRAJECTORY_CONFIG);
    let run = |seed: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = bin()
            .args(["gamma-trajectory", "--config"])
            .arg(&cfg)
            .args(["--seed", seed, "--out"])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        fs::read(out_dir.join("gamma-trajectory.csv")).unwrap()
    };
    assert_ne!(run("1", "s1"), run("2", "s2"));
    assert_eq!(run("3", "s3"), run("3", "s4"));
}

#[test]
fn dim_estimate_perfect_squares_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "dim.toml",
        r#"
experiment = "dim-estimate"
seed = 5

[dim]
set = "perfect-squares"
horizon = 100000
tolerance = 0.05
"#,
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["dim-estimate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let csv = fs::read_to_string(out_dir.join("dim-estimate.csv")).unwrap();
    assert!(csv.starts_with("m,count\n"));
    assert!(csv.contains("pass"), "{csv}");
}

/// Under-resolved mollifiers are a numerical failure: exit 3.
#[test]
fn wz_resolution_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "wz.toml",
        r#"
experiment = "wz-converge"
seed = 5

[kernel]
family = "constant"
rho0 = 1.0

[params]
nu = 0.5

[grid]
x-min = -4.0
x-max = 4.0
n-x = 41
horizon = 0.5
n-steps = 32

[wz]
eps0 = 1e-9
delta0 = 1e-9
levels = 2
sigma0 = 1.0
t = 0.5
x = 0.0
n-noise = 2
n-paths = 4
"#,
    );
    let out = bin()
        .args(["wz-converge", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn env_var_sets_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "traj.toml", TRAJECTORY_CONFIG);
    let out_dir = dir.path().join("from-env");
    let out = bin()
        .args(["gamma-trajectory", "--config"])
        .arg(&cfg)
        .env("KRAICHNAN_OUT", &out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out_dir.join("gamma-trajectory.csv").exists());
}

/// A single fast acceptance criterion through the CLI.
#[test]
fn self_test_single_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["self-test", "--criterion", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = fs::read_to_string(dir.path().join("self-test.txt")).unwrap();
    assert!(text.contains("[PASS] criterion  1"));
}
