//! Subcommand implementations and their exit-code contracts:
//!
//! * `check`: 0 when at least one theorem applies, 2 when none does, 1 on
//!   configuration errors.
//! * `run`: 0 completed, 3 blow-up (a finding, not a failure), 4 solver
//!   failure, 1 on configuration errors.
//! * `sweep`: 0 when every grid point produced an aggregate row, 1 otherwise.
//! * `verify`: 0 iff every built-in suite passes.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, Context, Result};

use sktlab_core::conditions::theorem_applicability_with;
use sktlab_core::solver::{run, RunResult, Termination};

use crate::artifacts::{
    atomic_write, fmt_g17, monitors_csv, run_summary, snapshot_text, write_json, RunSummary,
};
use crate::config::{set_by_path, ExperimentConfig, SweepSpec};
use crate::verify;

#[derive(Debug, Clone, Default)]
pub struct GlobalOpts {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub quiet: bool,
}

impl GlobalOpts {
    fn say(&self, msg: &str) {
        if !self.quiet {
            println!("{msg}");
        }
    }
}

pub fn cmd_check(config_path: &Path, opts: &GlobalOpts) -> Result<i32> {
    let cfg = ExperimentConfig::from_path(config_path)?;
    let model = cfg.build_model()?;
    let sbox = cfg.build_sample_box(opts.seed)?;
    let report = theorem_applicability_with(&model, &sbox, &cfg.report_options());
    let out_dir = cfg.output_dir(opts.output_dir.as_deref());
    write_json(&out_dir.join("report.json"), &report)?;
    for (name, verdict) in [
        ("Thm1", &report.theorems.thm1),
        ("Thm2", &report.theorems.thm2),
        ("Thm3", &report.theorems.thm3),
        ("Thm4", &report.theorems.thm4),
    ] {
        let status = match verdict.status {
            sktlab_core::conditions::ApplicabilityStatus::Applies => "applies".to_string(),
            sktlab_core::conditions::ApplicabilityStatus::Fails => {
                format!("fails ({})", verdict.failed.join(", "))
            }
            sktlab_core::conditions::ApplicabilityStatus::Undetermined => {
                format!("undetermined ({})", verdict.undetermined.join(", "))
            }
        };
        opts.say(&format!("{name}: {status}"));
    }
    opts.say(&format!("report: {}", out_dir.join("report.json").display()));
    Ok(if report.any_applies() { 0 } else { 2 })
}

/// Executes one configured run and writes its artifacts into `out_dir`.
fn execute_run(cfg: &ExperimentConfig, config_dir: &Path, out_dir: &Path, seed: Option<u64>) -> Result<(RunResult, RunSummary)> {
    let model = cfg.build_model()?;
    let grid = cfg.build_grid()?;
    let (u0, used_seed) = cfg.build_initial(&grid, seed, config_dir)?;
    let solver_cfg = cfg.build_solver_config()?;
    let result = run(&model, &grid, &u0, &solver_cfg).map_err(|e| anyhow!("run setup: {e}"))?;
    for (k, snap) in result.snapshots.iter().enumerate() {
        let path = out_dir.join("snapshots").join(format!("snap_{k:06}.txt"));
        atomic_write(&path, snapshot_text(&grid, snap).as_bytes())?;
    }
    atomic_write(&out_dir.join("monitors.csv"), monitors_csv(&result)?.as_bytes())?;
    let summary = run_summary(&result, used_seed);
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok((result, summary))
}

fn termination_exit_code(t: &Termination) -> i32 {
    match t {
        Termination::Completed => 0,
        Termination::BlowUp { .. } => 3,
        Termination::SolverFailure { .. } => 4,
    }
}

pub fn cmd_run(config_path: &Path, opts: &GlobalOpts) -> Result<i32> {
    let cfg = ExperimentConfig::from_path(config_path)?;
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    let out_dir = cfg.output_dir(opts.output_dir.as_deref());
    let (result, summary) = execute_run(&cfg, config_dir, &out_dir, opts.seed)?;
    opts.say(&format!(
        "termination: {} after {} steps (t = {}); artifacts in {}",
        summary.termination,
        summary.steps,
        fmt_g17(summary.t_final),
        out_dir.display()
    ));
    Ok(termination_exit_code(&result.termination))
}

struct SweepRow {
    point: usize,
    axis_values: Vec<String>,
    outcome: String,
    summary: Option<RunSummary>,
}

pub fn cmd_sweep(spec_path: &Path, opts: &GlobalOpts) -> Result<i32> {
    let spec = SweepSpec::from_path(spec_path)?;
    let spec_dir = spec_path.parent().unwrap_or(Path::new("."));
    let base_path = spec_dir.join(&spec.base);
    let base_text = std::fs::read_to_string(&base_path)
        .with_context(|| format!("cannot read base config {}", base_path.display()))?;
    let base_cfg = ExperimentConfig::from_str_checked(&base_text)?;
    let base_doc: toml::Value = toml::from_str(&base_text)?;
    let out_root = opts
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&base_cfg.output.dir));

    // Cartesian product over the axes (empty product = single base run).
    let mut points: Vec<Vec<usize>> = vec![Vec::new()];
    for axis in &spec.axes {
        if axis.values.is_empty() {
            anyhow::bail!("sweep axis '{}' has no values", axis.path);
        }
        let mut grown = Vec::new();
        for p in &points {
            for v in 0..axis.values.len() {
                let mut q = p.clone();
                q.push(v);
                grown.push(q);
            }
        }
        points = grown;
    }
    let total = points.len();
    opts.say(&format!("sweep: {total} point(s), parallelism {}", spec.effective_parallelism()));

    let rows: Mutex<Vec<Option<SweepRow>>> = Mutex::new((0..total).map(|_| None).collect());
    let next: AtomicUsize = AtomicUsize::new(0);
    let config_dir = base_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let workers = spec.effective_parallelism().min(total.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= total {
                    break;
                }
                let combo = &points[idx];
                let row = run_sweep_point(
                    idx,
                    combo,
                    &spec,
                    &base_doc,
                    &config_dir,
                    &out_root,
                    opts.seed,
                );
                rows.lock().unwrap()[idx] = Some(row);
            });
        }
    });

    let rows = rows.into_inner().unwrap();
    let mut csv = String::from("point");
    for axis in &spec.axes {
        csv.push(',');
        csv.push_str(&axis.path);
    }
    csv.push_str(",termination,mass_final,sup_linf,int_l2,int_l3,clamp_count\n");
    let mut all_rows = true;
    for row in rows.iter() {
        let row = match row {
            Some(r) => r,
            None => {
                all_rows = false;
                continue;
            }
        };
        csv.push_str(&row.point.to_string());
        for v in &row.axis_values {
            csv.push(',');
            csv.push_str(v);
        }
        match &row.summary {
            Some(s) => {
                csv.push_str(&format!(
                    ",{},{},{},{},{},{}\n",
                    row.outcome,
                    fmt_g17(s.mass_final),
                    fmt_g17(s.sup.get("linf").copied().unwrap_or(f64::NAN)),
                    fmt_g17(s.int_l2),
                    fmt_g17(s.int_l3),
                    s.clamp_count
                ));
            }
            None => {
                csv.push_str(&format!(",{},,,,,\n", row.outcome));
            }
        }
    }
    atomic_write(&out_root.join("aggregate.csv"), csv.as_bytes())?;
    opts.say(&format!("aggregate: {}", out_root.join("aggregate.csv").display()));
    Ok(if all_rows { 0 } else { 1 })
}

fn run_sweep_point(
    idx: usize,
    combo: &[usize],
    spec: &SweepSpec,
    base_doc: &toml::Value,
    config_dir: &Path,
    out_root: &Path,
    seed: Option<u64>,
) -> SweepRow {
    let mut doc = base_doc.clone();
    let mut axis_values = Vec::with_capacity(combo.len());
    for (axis, &vidx) in spec.axes.iter().zip(combo) {
        let value = axis.values[vidx].clone();
        axis_values.push(toml_scalar_to_string(&value));
        if let Err(e) = set_by_path(&mut doc, &axis.path, value) {
            return SweepRow { point: idx, axis_values, outcome: format!("config_error: {e}"), summary: None };
        }
    }
    let point_dir = out_root.join(format!("point_{idx:03}"));
    let materialize = || -> Result<(ExperimentConfig, String)> {
        let text = toml::to_string(&doc)?;
        let cfg = ExperimentConfig::from_str_checked(&text)?;
        Ok((cfg, text))
    };
    let (cfg, text) = match materialize() {
        Ok(v) => v,
        Err(e) => {
            return SweepRow { point: idx, axis_values, outcome: format!("config_error: {e}"), summary: None };
        }
    };
    if let Err(e) = atomic_write(&point_dir.join("config.toml"), text.as_bytes()) {
        return SweepRow { point: idx, axis_values, outcome: format!("io_error: {e}"), summary: None };
    }
    match execute_run(&cfg, config_dir, &point_dir, seed) {
        Ok((result, summary)) => SweepRow {
            point: idx,
            axis_values,
            outcome: result.termination.kind().to_string(),
            summary: Some(summary),
        },
        Err(e) => SweepRow { point: idx, axis_values, outcome: format!("run_error: {e}"), summary: None },
    }
}

fn toml_scalar_to_string(v: &toml::Value) -> String {
    match v {
        toml::Value::Float(f) => fmt_g17(*f),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn cmd_verify(opts: &GlobalOpts) -> Result<i32> {
    let (report, all_pass) = verify::run_all();
    let out_dir = opts.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    atomic_write(&out_dir.join("verify_report.txt"), report.as_bytes())?;
    if !opts.quiet {
        print!("{report}");
    }
    Ok(if all_pass { 0 } else { 1 })
}
