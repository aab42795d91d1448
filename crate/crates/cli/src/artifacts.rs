//! On-disk artifacts: monitor CSV, snapshot files, summary and report JSON.
//! Every file is written atomically (temp + rename) with locale-independent
//! formatting at 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use sktlab_core::monitors::sup_norm_envelope;
use sktlab_core::solver::{Grid, RunResult, StateField, Termination};

/// 17 significant digits, C locale.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = Path::new(&tmp);
    std::fs::write(tmp_path, contents)
        .with_context(|| format!("cannot write {}", tmp_path.display()))?;
    std::fs::rename(tmp_path, path)
        .with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

/// Monitor CSV: the fixed column set, then one `lp_p<p>` column per
/// configured energy exponent and one `l<q>` column per extra norm.
pub fn monitors_csv(result: &RunResult) -> Result<String> {
    let b = &result.monitors;
    let rows = b.mass.samples.len();
    let fixed: [(&str, &Vec<(f64, f64)>); 10] = [
        ("mass", &b.mass.samples),
        ("entropy", &b.entropy.samples),
        ("dissipation", &b.dissipation.samples),
        ("entropy_residual", &b.entropy_residual.samples),
        ("linf", &b.linf.samples),
        ("l2", &b.l2.samples),
        ("l3", &b.l3.samples),
        ("llogl", &b.llogl.samples),
        ("int_l2", &b.int_l2.samples),
        ("int_l3", &b.int_l3.samples),
    ];
    for (name, series) in &fixed {
        if series.len() != rows {
            bail!("monitor series '{name}' has {} samples, expected {rows}", series.len());
        }
    }
    let mut header = String::from(
        "t,mass,entropy,dissipation,entropy_residual,linf,l2,l3,llogl,int_l2,int_l3,clamp_count",
    );
    for (p, _) in &b.lp_residuals {
        let _ = write!(header, ",lp_p{p}");
    }
    for (q, _) in &b.lq_extra {
        let _ = write!(header, ",l{q}");
    }
    let mut out = header;
    out.push('\n');
    for k in 0..rows {
        let t = b.mass.samples[k].0;
        let _ = write!(out, "{}", fmt_g17(t));
        for (_, series) in &fixed {
            let _ = write!(out, ",{}", fmt_g17(series[k].1));
        }
        let _ = write!(out, ",{}", b.clamp_count.samples[k].1 as u64);
        for (_, series) in &b.lp_residuals {
            let _ = write!(out, ",{}", fmt_g17(series.samples[k].1));
        }
        for (_, series) in &b.lq_extra {
            let _ = write!(out, ",{}", fmt_g17(series.samples[k].1));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Snapshot: header line with time, grid shape and cell size, then one
/// record per cell in row-major order, columns = species values.
pub fn snapshot_text(grid: &Grid, state: &StateField) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# t={} dim={} cells={}x{} lengths={}x{} h={}x{}",
        fmt_g17(state.t()),
        grid.dim(),
        grid.nx(),
        grid.ny(),
        fmt_g17(grid.lx()),
        fmt_g17(grid.ly()),
        fmt_g17(grid.hx()),
        fmt_g17(grid.hy()),
    );
    for cell in 0..state.cells() {
        for s in 0..state.species() {
            if s > 0 {
                out.push(' ');
            }
            out.push_str(&fmt_g17(state.get(s, cell)));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeSummary {
    pub c2: f64,
    pub c3: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub termination: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub termination_detail: Option<String>,
    pub t_final: f64,
    pub steps: u64,
    pub clamp_count: u64,
    pub clamp_correction_total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Observed suprema of the monitored norms over the run.
    pub sup: BTreeMap<String, f64>,
    pub mass_initial: f64,
    pub mass_final: f64,
    pub entropy_final: f64,
    pub int_l2: f64,
    pub int_l3: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<EnvelopeSummary>,
    /// Largest absolute Lp energy-identity defect per exponent.
    pub lp_residual_sup: BTreeMap<String, f64>,
}

pub fn run_summary(result: &RunResult, seed: Option<u64>) -> RunSummary {
    let b = &result.monitors;
    let (termination, termination_detail) = match &result.termination {
        Termination::Completed => (String::from("completed"), None),
        Termination::BlowUp { t } => (String::from("blow_up"), Some(format!("t = {}", fmt_g17(*t)))),
        Termination::SolverFailure { t, reason } => (
            String::from("solver_failure"),
            Some(format!("t = {}: {reason}", fmt_g17(*t))),
        ),
    };
    let mut sup = BTreeMap::new();
    for (name, series) in [
        ("mass", &b.mass),
        ("entropy", &b.entropy),
        ("linf", &b.linf),
        ("l2", &b.l2),
        ("l3", &b.l3),
        ("llogl", &b.llogl),
    ] {
        if !series.samples.is_empty() {
            sup.insert(name.to_string(), series.max_value());
        }
    }
    let envelope = sup_norm_envelope(&b.linf.samples).ok().map(|fit| EnvelopeSummary {
        c2: fit.c2,
        c3: fit.c3,
        ok: fit.ok,
    });
    let mut lp_residual_sup = BTreeMap::new();
    for (p, series) in &b.lp_residuals {
        let max_abs = series.samples.iter().map(|&(_, v)| v.abs()).fold(0.0f64, f64::max);
        lp_residual_sup.insert(format!("{p}"), max_abs);
    }
    RunSummary {
        termination,
        termination_detail,
        t_final: b.mass.samples.last().map(|&(t, _)| t).unwrap_or(0.0),
        steps: result.steps,
        clamp_count: result.clamp_events,
        clamp_correction_total: result.clamp_correction_total,
        seed,
        sup,
        mass_initial: b.mass.samples.first().map(|&(_, v)| v).unwrap_or(0.0),
        mass_final: b.mass.samples.last().map(|&(_, v)| v).unwrap_or(0.0),
        entropy_final: b.entropy.samples.last().map(|&(_, v)| v).unwrap_or(0.0),
        int_l2: b.int_l2.last_value().unwrap_or(0.0),
        int_l3: b.int_l3.last_value().unwrap_or(0.0),
        envelope,
        lp_residual_sup,
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sktlab_core::model::{ModelSpec, ReactionModel, TauVector};
    use sktlab_core::solver::{run, Scheme, SolverConfig};

    fn tiny_run() -> (Grid, RunResult) {
        let m = ModelSpec::semilinear(
            vec![1.0, 1.0],
            TauVector::ones(2),
            ReactionModel::mass_dissipative(),
        )
        .unwrap();
        let g = Grid::one_dim(4, 1.0).unwrap();
        let u0 = StateField::constant(&g, &[1.0, 2.0]);
        let mut cfg = SolverConfig::new(Scheme::SemiImplicit, 0.05, 0.2);
        cfg.lp_exponents = vec![2.0];
        (g.clone(), run(&m, &g, &u0, &cfg).unwrap())
    }

    #[test]
    fn csv_has_documented_columns_and_17_digits() {
        let (_, result) = tiny_run();
        let csv = monitors_csv(&result).unwrap();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(
            header,
            "t,mass,entropy,dissipation,entropy_residual,linf,l2,l3,llogl,int_l2,int_l3,clamp_count,lp_p2"
        );
        let first = lines.next().unwrap();
        let cols: Vec<&str> = first.split(',').collect();
        assert_eq!(cols.len(), 13);
        // 17 significant digits: 16 after the decimal point in e-notation.
        assert!(cols[1].contains('.'));
        let mantissa = cols[1].split('e').next().unwrap();
        assert_eq!(mantissa.split('.').nth(1).unwrap().len(), 16);
    }

    #[test]
    fn snapshot_round_trips_through_reader() {
        let (g, result) = tiny_run();
        let last = result.snapshots.last().unwrap();
        let text = snapshot_text(&g, last);
        let dir = std::env::temp_dir().join(format!("sktlab-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("snap.txt");
        atomic_write(&path, text.as_bytes()).unwrap();
        let back = crate::config::read_cell_file(&path, &g, 2).unwrap();
        for s in 0..2 {
            for c in 0..g.cells() {
                assert_eq!(back.get(s, c), last.get(s, c), "species {s} cell {c}");
            }
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn summary_reports_mass_decay() {
        let (_, result) = tiny_run();
        let summary = run_summary(&result, Some(3));
        assert_eq!(summary.termination, "completed");
        assert!(summary.mass_final < summary.mass_initial);
        assert_eq!(summary.seed, Some(3));
        assert!(summary.lp_residual_sup.contains_key("2"));
    }
}
