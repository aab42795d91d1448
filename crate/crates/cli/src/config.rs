//! Experiment and sweep configuration: TOML sections mirroring the domain
//! types, plus builders turning them into core objects.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use sktlab_core::conditions::{ReportOptions, SampleBox};
use sktlab_core::linalg::SquareMatrix;
use sktlab_core::model::{
    LotkaVolterra, ModelSpec, ReactionModel, SKTCoefficients, TauVector,
};
use sktlab_core::solver::{Grid, Scheme, SolverConfig, StateField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub initial: InitialSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub monitors: MonitorsSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// `skt` (linear diffusion law from the tables) or `semilinear`
    /// (constant diffusion).
    pub preset: String,
    pub tau: Vec<f64>,
    /// SKT base coefficients `a_i0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Vec<f64>>,
    /// SKT cross/self table `a_ij`, row major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    /// Constant diffusion coefficients for the semilinear preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<f64>>,
    /// `zero | lotka_volterra | mass_dissipative | logistic_dissipative |
    /// cubic_dissipative`.
    pub reaction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lv: Option<LvSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LvSection {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    /// Cells per axis: one entry in 1D, two in 2D.
    pub cells: Vec<usize>,
    /// Domain lengths per axis.
    pub lengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// `constant | cosine | random | file`.
    pub kind: String,
    /// Per-species base values (constant, cosine, random).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<f64>>,
    /// Cosine amplitude per species, or relative amplitude for `random`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<Vec<f64>>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Number of cosine modes mixed into a random field.
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Per-cell file for `kind = "file"`, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

fn default_seed() -> u64 {
    0
}

fn default_modes() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// `explicit | semi_implicit`.
    pub scheme: String,
    pub dt_initial: f64,
    pub dt_max: f64,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_floor")]
    pub positivity_floor: f64,
    #[serde(default = "default_blow_up")]
    pub blow_up_threshold: f64,
    pub t_end: f64,
    /// Accepted steps between snapshots; 0 writes endpoints only.
    #[serde(default)]
    pub snapshot_every: usize,
}

fn default_safety() -> f64 {
    0.9
}

fn default_floor() -> f64 {
    1e-12
}

fn default_blow_up() -> f64 {
    1e12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorsSection {
    /// Accepted steps between monitor samples.
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    /// Exponents for the Lp energy-identity residual monitors.
    #[serde(default)]
    pub p_list: Vec<f64>,
    /// Extra Lq norms beyond the built-in 2, 3 and infinity.
    #[serde(default)]
    pub q_list: Vec<f64>,
}

fn default_cadence() -> usize {
    1
}

impl Default for MonitorsSection {
    fn default() -> Self {
        MonitorsSection { cadence: 1, p_list: Vec::new(), q_list: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_interior_floor")]
    pub interior_floor: f64,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
}

fn default_count() -> usize {
    256
}

fn default_interior_floor() -> f64 {
    0.01
}

fn default_alphas() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 5.0]
}

impl Default for CheckSection {
    fn default() -> Self {
        CheckSection {
            lower: None,
            upper: None,
            count: default_count(),
            seed: 0,
            interior_floor: default_interior_floor(),
            alphas: default_alphas(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
}

fn default_dir() -> String {
    String::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_dir() }
    }
}

/// Parameter sweep: a base config plus axes of dotted-path substitutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Base experiment config, relative to the sweep file.
    pub base: String,
    #[serde(default)]
    pub axes: Vec<SweepAxis>,
    /// Concurrent runs; defaults to `SKTLAB_PARALLELISM` or 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted config path, e.g. `model.a.0.1` or `solver.dt_initial`.
    pub path: String,
    pub values: Vec<toml::Value>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_str_checked(&text)
    }

    pub fn from_str_checked(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn species(&self) -> usize {
        self.model.tau.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.species();
        if n == 0 {
            bail!("model.tau must list at least one species");
        }
        match self.model.preset.as_str() {
            "skt" => {
                let a0 = self.model.a0.as_ref().ok_or_else(|| anyhow!("model.a0 is required for the skt preset"))?;
                let a = self.model.a.as_ref().ok_or_else(|| anyhow!("model.a is required for the skt preset"))?;
                if a0.len() != n || a.len() != n || a.iter().any(|row| row.len() != n) {
                    bail!("model.a0 and model.a must be sized by the species count {n}");
                }
            }
            "semilinear" => {
                let d = self.model.d.as_ref().ok_or_else(|| anyhow!("model.d is required for the semilinear preset"))?;
                if d.len() != n {
                    bail!("model.d must have {n} entries");
                }
            }
            other => bail!("unknown model.preset '{other}' (expected skt or semilinear)"),
        }
        match self.model.reaction.as_str() {
            "zero" | "mass_dissipative" | "logistic_dissipative" | "cubic_dissipative" => {}
            "lotka_volterra" => {
                let lv = self.model.lv.as_ref().ok_or_else(|| anyhow!("model.lv is required for the lotka_volterra reaction"))?;
                if n != 2 || lv.a.len() != 2 || lv.b.len() != 2 || lv.c.len() != 2 {
                    bail!("the lotka_volterra reaction needs two species and 2-entry lv tables");
                }
            }
            other => bail!("unknown model.reaction '{other}'"),
        }
        if !(self.grid.dim == 1 || self.grid.dim == 2) {
            bail!("grid.dim must be 1 or 2");
        }
        if self.grid.cells.len() != self.grid.dim || self.grid.lengths.len() != self.grid.dim {
            bail!("grid.cells and grid.lengths must have {} entries", self.grid.dim);
        }
        match self.solver.scheme.as_str() {
            "explicit" | "semi_implicit" => {}
            other => bail!("unknown solver.scheme '{other}' (expected explicit or semi_implicit)"),
        }
        match self.initial.kind.as_str() {
            "constant" | "cosine" | "random" => {
                let base = self.initial.base.as_ref().ok_or_else(|| anyhow!("initial.base is required for kind '{}'", self.initial.kind))?;
                if base.len() != n {
                    bail!("initial.base must have {n} entries");
                }
                if let Some(amp) = &self.initial.amplitude {
                    if amp.len() != n {
                        bail!("initial.amplitude must have {n} entries");
                    }
                }
            }
            "file" => {
                if self.initial.path.is_none() {
                    bail!("initial.path is required for kind 'file'");
                }
            }
            other => bail!("unknown initial.kind '{other}'"),
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<ModelSpec> {
        let n = self.species();
        let tau = TauVector::new(self.model.tau.clone()).map_err(|e| anyhow!("model.tau: {e}"))?;
        let reaction = match self.model.reaction.as_str() {
            "zero" => ReactionModel::zero(),
            "mass_dissipative" => ReactionModel::mass_dissipative(),
            "logistic_dissipative" => ReactionModel::logistic_dissipative(),
            "cubic_dissipative" => ReactionModel::cubic_dissipative(),
            "lotka_volterra" => {
                let lv = self.model.lv.as_ref().expect("validated");
                ReactionModel::lotka_volterra(LotkaVolterra {
                    a: [lv.a[0], lv.a[1]],
                    b: [lv.b[0], lv.b[1]],
                    c: [lv.c[0], lv.c[1]],
                })
            }
            _ => unreachable!("validated"),
        };
        let lv_table = self.model.lv.as_ref().map(|lv| LotkaVolterra {
            a: [lv.a[0], lv.a[1]],
            b: [lv.b[0], lv.b[1]],
            c: [lv.c[0], lv.c[1]],
        });
        match self.model.preset.as_str() {
            "skt" => {
                let a0 = self.model.a0.clone().expect("validated");
                let rows = self.model.a.as_ref().expect("validated");
                let a = SquareMatrix::from_fn(n, |i, j| rows[i][j]);
                let coeffs = SKTCoefficients::new(a0, a, if n == 2 { lv_table } else { None })
                    .map_err(|e| anyhow!("model coefficients: {e}"))?;
                ModelSpec::skt(coeffs, tau, reaction).map_err(|e| anyhow!("model: {e}"))
            }
            "semilinear" => {
                let d = self.model.d.clone().expect("validated");
                ModelSpec::semilinear(d, tau, reaction).map_err(|e| anyhow!("model: {e}"))
            }
            _ => unreachable!("validated"),
        }
    }

    pub fn build_grid(&self) -> Result<Grid> {
        let g = match self.grid.dim {
            1 => Grid::one_dim(self.grid.cells[0], self.grid.lengths[0]),
            2 => Grid::two_dim(
                self.grid.cells[0],
                self.grid.cells[1],
                self.grid.lengths[0],
                self.grid.lengths[1],
            ),
            _ => unreachable!("validated"),
        };
        g.map_err(|e| anyhow!("grid: {e}"))
    }

    /// Builds the initial state. `seed_override` (the global `--seed` flag)
    /// replaces the configured seed for random fields; `config_dir` anchors
    /// relative per-cell file paths. Returns the effective seed used, if any.
    pub fn build_initial(
        &self,
        grid: &Grid,
        seed_override: Option<u64>,
        config_dir: &Path,
    ) -> Result<(StateField, Option<u64>)> {
        let n = self.species();
        match self.initial.kind.as_str() {
            "constant" => {
                let base = self.initial.base.as_ref().expect("validated");
                Ok((StateField::constant(grid, base), None))
            }
            "cosine" => {
                let base = self.initial.base.as_ref().expect("validated");
                let amp = self.amplitudes(n, 0.1);
                let field = StateField::from_fn(grid, n, |s, ix, iy| {
                    base[s] + amp[s] * cosine_mode(grid, 1, ix, iy)
                });
                Ok((field, None))
            }
            "random" => {
                let base = self.initial.base.as_ref().expect("validated");
                let amp = self.amplitudes(n, 0.5);
                let seed = seed_override.unwrap_or(self.initial.seed);
                let field = random_smooth_field(grid, base, &amp, self.initial.modes, seed)?;
                Ok((field, Some(seed)))
            }
            "file" => {
                let rel = self.initial.path.as_ref().expect("validated");
                let path = config_dir.join(rel);
                let field = read_cell_file(&path, grid, n)?;
                Ok((field, None))
            }
            _ => unreachable!("validated"),
        }
    }

    fn amplitudes(&self, n: usize, default: f64) -> Vec<f64> {
        self.initial.amplitude.clone().unwrap_or_else(|| vec![default; n])
    }

    pub fn build_solver_config(&self) -> Result<SolverConfig> {
        let scheme = match self.solver.scheme.as_str() {
            "explicit" => Scheme::Explicit,
            "semi_implicit" => Scheme::SemiImplicit,
            _ => unreachable!("validated"),
        };
        let mut cfg = SolverConfig::new(scheme, self.solver.dt_initial, self.solver.t_end);
        cfg.dt_max = self.solver.dt_max;
        cfg.safety = self.solver.safety;
        cfg.positivity_floor = self.solver.positivity_floor;
        cfg.blow_up_threshold = self.solver.blow_up_threshold;
        cfg.snapshot_every = self.solver.snapshot_every;
        cfg.monitor_every = self.monitors.cadence;
        cfg.lp_exponents = self.monitors.p_list.clone();
        cfg.lq_extra = self.monitors.q_list.clone();
        Ok(cfg)
    }

    /// Sample box for condition checks; the default covers `[0, 10]^N`.
    pub fn build_sample_box(&self, seed_override: Option<u64>) -> Result<SampleBox> {
        let n = self.species();
        let lower = self.check.lower.clone().unwrap_or_else(|| vec![0.0; n]);
        let upper = self.check.upper.clone().unwrap_or_else(|| vec![10.0; n]);
        let seed = seed_override.unwrap_or(self.check.seed);
        SampleBox::new(lower, upper, self.check.count, seed).map_err(|e| anyhow!("check box: {e}"))
    }

    pub fn report_options(&self) -> ReportOptions {
        ReportOptions {
            alphas: self.check.alphas.clone(),
            interior_floor: self.check.interior_floor,
        }
    }

    pub fn output_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        override_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&self.output.dir))
    }
}

fn cosine_mode(grid: &Grid, k: usize, ix: usize, iy: usize) -> f64 {
    let (x, y) = grid.cell_center(ix, iy);
    let kx = (k as f64 * std::f64::consts::PI * x / grid.lx()).cos();
    if grid.dim() == 1 {
        kx
    } else {
        kx * (k as f64 * std::f64::consts::PI * y / grid.ly()).cos()
    }
}

/// Smooth strictly positive random field: a seeded low-mode cosine mixture
/// scaled to a relative amplitude, so refinement studies see the same
/// continuum initial datum on every grid.
fn random_smooth_field(
    grid: &Grid,
    base: &[f64],
    amplitude: &[f64],
    modes: usize,
    seed: u64,
) -> Result<StateField> {
    let n = base.len();
    if amplitude.iter().any(|&a| !(0.0..1.0).contains(&a)) {
        bail!("initial.amplitude must lie in [0, 1) for random fields (positivity)");
    }
    let modes = modes.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = vec![0.0f64; n * modes];
    for w in weights.iter_mut() {
        *w = rng.gen_range(-1.0..1.0);
    }
    // Normalize per species so the perturbation never exceeds the amplitude.
    for s in 0..n {
        let sum: f64 = weights[s * modes..(s + 1) * modes].iter().map(|w| w.abs()).sum();
        if sum > 0.0 {
            for w in &mut weights[s * modes..(s + 1) * modes] {
                *w /= sum;
            }
        }
    }
    Ok(StateField::from_fn(grid, n, |s, ix, iy| {
        let mut perturbation = 0.0;
        for k in 0..modes {
            perturbation += weights[s * modes + k] * cosine_mode(grid, k + 1, ix, iy);
        }
        base[s] * (1.0 + amplitude[s] * perturbation)
    }))
}

/// Reads a per-cell state file: `#` comment lines, then one row per cell in
/// row-major order with one column per species.
pub fn read_cell_file(path: &Path, grid: &Grid, species: usize) -> Result<StateField> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read initial state file {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| anyhow!("{}:{}: bad number '{tok}'", path.display(), lineno + 1))
            })
            .collect::<Result<_>>()?;
        if row.len() != species {
            bail!(
                "{}:{}: expected {species} columns, found {}",
                path.display(),
                lineno + 1,
                row.len()
            );
        }
        rows.push(row);
    }
    if rows.len() != grid.cells() {
        bail!(
            "{}: expected {} cell rows, found {}",
            path.display(),
            grid.cells(),
            rows.len()
        );
    }
    let mut field = StateField::constant(grid, &vec![0.0; species]);
    for (cell, row) in rows.iter().enumerate() {
        for (s, &v) in row.iter().enumerate() {
            field.set(s, cell, v);
        }
    }
    Ok(field)
}

impl SweepSpec {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read sweep spec {}", path.display()))?;
        let spec: SweepSpec = toml::from_str(&text)?;
        Ok(spec)
    }

    pub fn effective_parallelism(&self) -> usize {
        self.parallelism
            .or_else(|| {
                std::env::var("SKTLAB_PARALLELISM").ok().and_then(|v| v.parse().ok())
            })
            .unwrap_or(1)
            .max(1)
    }
}

/// Sets a dotted path (`model.a.0.1`) inside a TOML document; integer
/// segments index arrays.
pub fn set_by_path(doc: &mut toml::Value, path: &str, value: toml::Value) -> Result<()> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.is_empty() {
        bail!("empty config path");
    }
    let mut cursor = doc;
    for (k, seg) in segments.iter().enumerate() {
        let last = k + 1 == segments.len();
        match cursor {
            toml::Value::Table(map) => {
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                cursor = map
                    .get_mut(*seg)
                    .ok_or_else(|| anyhow!("config path '{path}': missing key '{seg}'"))?;
            }
            toml::Value::Array(arr) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| anyhow!("config path '{path}': '{seg}' is not an array index"))?;
                if idx >= arr.len() {
                    bail!("config path '{path}': index {idx} out of bounds");
                }
                if last {
                    arr[idx] = value;
                    return Ok(());
                }
                cursor = &mut arr[idx];
            }
            _ => bail!("config path '{path}': '{seg}' descends into a scalar"),
        }
    }
    Ok(())
}
