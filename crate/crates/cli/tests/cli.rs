//! End-to-end contract tests of the `sktlab` binary: exit codes, artifact
//! layout and the sweep machinery.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sktlab"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sktlab-cli-{tag}-{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn heat_config_t(dir: &Path, scheme: &str, dt: f64, t_end: f64, extra: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(
        &path,
        format!(
            r#"
[model]
preset = "semilinear"
tau = [1.0]
d = [1.0]
reaction = "zero"

[grid]
dim = 1
cells = [32]
lengths = [1.0]

[initial]
kind = "cosine"
base = [1.0]
amplitude = [0.1]

[solver]
scheme = "{scheme}"
dt_initial = {dt}
dt_max = {dt}
t_end = {t_end}
snapshot_every = 50
{extra}
"#
        ),
    )
    .unwrap();
    path
}

fn heat_config(dir: &Path, scheme: &str, dt: f64, extra: &str) -> PathBuf {
    heat_config_t(dir, scheme, dt, 0.2, extra)
}

#[test]
fn run_writes_artifacts_and_exits_zero() {
    let dir = workdir("run-ok");
    let cfg = heat_config(&dir, "semi_implicit", 1e-3, "[output]\ndir = \"unused\"");
    let out = dir.join("out");
    let output: Output = bin()
        .args(["--quiet", "--output-dir"])
        .arg(&out)
        .arg("run")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    assert!(out.join("monitors.csv").exists());
    assert!(out.join("summary.json").exists());
    let snaps: Vec<_> = std::fs::read_dir(out.join("snapshots")).unwrap().collect();
    assert!(snaps.len() >= 2, "expected initial+final snapshots at least");
    // No stray temp files after atomic writes.
    let leftovers: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["termination"], "completed");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn explicit_run_with_huge_step_reports_blow_up() {
    let dir = workdir("run-blowup");
    let cfg = heat_config_t(&dir, "explicit", 1.0, 50.0, "");
    let status = bin()
        .args(["--quiet", "--output-dir"])
        .arg(dir.join("out"))
        .arg("run")
        .arg(&cfg)
        .status()
        .unwrap();
    assert!(
        status.code() == Some(3) || status.code() == Some(4),
        "expected blow-up (3) or solver failure (4), got {:?}",
        status.code()
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_config_exits_one_and_names_the_key() {
    let dir = workdir("bad-config");
    let path = dir.join("bad.toml");
    // Missing tau entirely.
    std::fs::write(
        &path,
        r#"
[model]
preset = "semilinear"
d = [1.0]
reaction = "zero"

[grid]
dim = 1
cells = [8]
lengths = [1.0]

[initial]
kind = "constant"
base = [1.0]

[solver]
scheme = "semi_implicit"
dt_initial = 1e-3
dt_max = 1e-3
t_end = 0.1
"#,
    )
    .unwrap();
    let output = bin().arg("check").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("tau"), "error must name the offending key: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn check_semilinear_dissipative_applies_thm4() {
    let dir = workdir("check-ok");
    let path = dir.join("ok.toml");
    std::fs::write(
        &path,
        r#"
[model]
preset = "semilinear"
tau = [1.0, 1.0]
d = [1.0, 1.0]
reaction = "mass_dissipative"

[grid]
dim = 1
cells = [8]
lengths = [1.0]

[initial]
kind = "constant"
base = [1.0, 1.0]

[solver]
scheme = "semi_implicit"
dt_initial = 1e-3
dt_max = 1e-3
t_end = 0.1
"#,
    )
    .unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["--quiet", "--output-dir"])
        .arg(&out)
        .arg("check")
        .arg(&path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0), "Thm4 must apply");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["theorems"]["Thm4"]["status"], "applies");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_without_axes_runs_single_base_point() {
    let dir = workdir("sweep-base");
    heat_config(&dir, "semi_implicit", 1e-3, "");
    std::fs::write(dir.join("sweep.toml"), "base = \"config.toml\"\n").unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["--quiet", "--output-dir"])
        .arg(&out)
        .arg("sweep")
        .arg(dir.join("sweep.toml"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "header plus one row: {csv}");
    assert!(out.join("point_000").join("summary.json").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_axis_produces_one_row_per_value() {
    let dir = workdir("sweep-axis");
    heat_config(&dir, "semi_implicit", 1e-3, "");
    std::fs::write(
        dir.join("sweep.toml"),
        r#"
base = "config.toml"
parallelism = 2

[[axes]]
path = "model.d.0"
values = [0.5, 1.0, 2.0]
"#,
    )
    .unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["--quiet", "--output-dir"])
        .arg(&out)
        .arg("sweep")
        .arg(dir.join("sweep.toml"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4, "header plus three rows: {csv}");
    assert!(csv.lines().next().unwrap().starts_with("point,model.d.0,"));
    for k in 0..3 {
        let cfg_echo = out.join(format!("point_{k:03}")).join("config.toml");
        assert!(cfg_echo.exists(), "materialized config for point {k}");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn seed_override_is_echoed_in_summary() {
    let dir = workdir("seed-echo");
    let path = dir.join("random.toml");
    std::fs::write(
        &path,
        r#"
[model]
preset = "semilinear"
tau = [1.0]
d = [1.0]
reaction = "zero"

[grid]
dim = 1
cells = [16]
lengths = [1.0]

[initial]
kind = "random"
base = [1.0]
amplitude = [0.3]
seed = 1

[solver]
scheme = "semi_implicit"
dt_initial = 1e-3
dt_max = 1e-3
t_end = 0.05
"#,
    )
    .unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["--quiet", "--seed", "99", "--output-dir"])
        .arg(&out)
        .arg("run")
        .arg(&path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 99);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn two_dim_run_round_trips_snapshot_as_initial_file() {
    let dir = workdir("twodim");
    let path = dir.join("cfg2d.toml");
    std::fs::write(
        &path,
        r#"
[model]
preset = "skt"
tau = [1.0, 1.0]
a0 = [1.0, 1.0]
a = [[1.0, 0.0], [0.0, 1.0]]
reaction = "mass_dissipative"

[grid]
dim = 2
cells = [12, 10]
lengths = [1.0, 2.0]

[initial]
kind = "random"
base = [1.0, 0.8]
amplitude = [0.3, 0.3]
seed = 4

[solver]
scheme = "semi_implicit"
dt_initial = 1e-3
dt_max = 1e-3
t_end = 0.05
"#,
    )
    .unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["--quiet", "--output-dir"])
        .arg(&out)
        .arg("run")
        .arg(&path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    // Feed the final snapshot back as a per-cell initial file.
    let snaps: Vec<PathBuf> = {
        let mut v: Vec<_> = std::fs::read_dir(out.join("snapshots"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        v.sort();
        v
    };
    let restart_cfg = dir.join("restart.toml");
    let text = std::fs::read_to_string(&path).unwrap().replace(
        "kind = \"random\"\nbase = [1.0, 0.8]\namplitude = [0.3, 0.3]\nseed = 4",
        &format!("kind = \"file\"\npath = \"{}\"", snaps.last().unwrap().display()),
    );
    std::fs::write(&restart_cfg, text).unwrap();
    let status = bin()
        .args(["--quiet", "--output-dir"])
        .arg(dir.join("out2"))
        .arg("run")
        .arg(&restart_cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0), "restart from snapshot file must run");
    std::fs::remove_dir_all(&dir).ok();
}
