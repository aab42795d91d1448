//! Finite-volume time integration of the cross-diffusion system on a uniform
//! rectangular grid with homogeneous Neumann (zero-flux) boundary.
//!
//! The Laplacian-of-product form `Lap(d_i(u) u_i)` is discretized directly in
//! flux form: every interior face carries one flux, added to one cell and
//! subtracted from its neighbour, so the cell sum vanishes to roundoff and
//! discrete mass obeys
//!
//! ```text
//! sum_c tau.u^{n+1} vol - sum_c tau.u^n vol = dt sum_c sum_i f_i(u^n) vol
//! ```
//!
//! up to the linear-solver tolerance and recorded clamp corrections. The
//! semi-implicit scheme freezes `d` at time level `n` and is implicit in
//! `u_i` only; the resulting system is solved as the symmetric positive
//! definite problem `((tau/dt) D^{-1} - Lap) v = rhs` in the variable
//! `v = d u` by Jacobi-preconditioned conjugate gradients, and the accepted
//! state is rebuilt through one conservative flux application of `v`.
//! Negative undershoot is clamped (not rejected) at the positivity floor;
//! every clamp event is counted and its mass correction recorded.

// Float methods (ln, exp, powf, ...) for pure no_std dependency graphs; when a
// std crate sits anywhere in the graph the inherent methods shadow these.
#[allow(unused_imports)]
use num_traits::Float as _;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::ModelSpec;
use crate::monitors::{self, MonitorBundle, RunMetadata};
use crate::{Error, Result};

/// Uniform cell-centered grid on a rectangle; 1D grids are a single row.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid {
    pub fn one_dim(nx: usize, lx: f64) -> Result<Self> {
        if nx == 0 || !(lx > 0.0) {
            return Err(Error::InvalidInput(String::from("grid needs cells >= 1 and positive length")));
        }
        Ok(Grid { dim: 1, nx, ny: 1, lx, ly: 1.0 })
    }

    pub fn two_dim(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx == 0 || ny == 0 || !(lx > 0.0) || !(ly > 0.0) {
            return Err(Error::InvalidInput(String::from("grid needs cells >= 1 and positive lengths")));
        }
        Ok(Grid { dim: 2, nx, ny, lx, ly })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        if self.dim == 1 {
            1.0
        } else {
            self.ly / self.ny as f64
        }
    }

    pub fn cell_volume(&self) -> f64 {
        self.hx() * self.hy()
    }

    /// Center coordinates of cell `(ix, iy)`.
    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        ((ix as f64 + 0.5) * self.hx(), (iy as f64 + 0.5) * self.hy())
    }
}

/// Per-species cell values at a time `t`; species-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    species: usize,
    cells: usize,
    t: f64,
    data: Vec<f64>,
}

impl StateField {
    pub fn constant(grid: &Grid, values: &[f64]) -> Self {
        let cells = grid.cells();
        let mut data = Vec::with_capacity(values.len() * cells);
        for &v in values {
            data.extend(core::iter::repeat(v).take(cells));
        }
        StateField { species: values.len(), cells, t: 0.0, data }
    }

    /// Builds a field from a per-cell closure `(species, ix, iy) -> value`.
    pub fn from_fn(grid: &Grid, species: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let cells = grid.cells();
        let mut data = vec![0.0; species * cells];
        for s in 0..species {
            for iy in 0..grid.ny() {
                for ix in 0..grid.nx() {
                    data[s * cells + iy * grid.nx() + ix] = f(s, ix, iy);
                }
            }
        }
        StateField { species, cells, t: 0.0, data }
    }

    pub fn species(&self) -> usize {
        self.species
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn set_t(&mut self, t: f64) {
        self.t = t;
    }

    pub fn species_slice(&self, s: usize) -> &[f64] {
        &self.data[s * self.cells..(s + 1) * self.cells]
    }

    pub fn species_slice_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.data[s * self.cells..(s + 1) * self.cells]
    }

    pub fn get(&self, s: usize, cell: usize) -> f64 {
        self.data[s * self.cells + cell]
    }

    pub fn set(&mut self, s: usize, cell: usize, v: f64) {
        self.data[s * self.cells + cell] = v;
    }

    /// Copies the state of one cell into a species vector.
    pub fn cell_state(&self, cell: usize, out: &mut [f64]) {
        for s in 0..self.species {
            out[s] = self.data[s * self.cells + cell];
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Explicit,
    SemiImplicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt_initial: f64,
    pub dt_max: f64,
    /// Stability safety factor for the explicit suggestion, in (0, 1].
    pub safety: f64,
    pub positivity_floor: f64,
    pub blow_up_threshold: f64,
    pub t_end: f64,
    /// Accepted steps between snapshots; 0 records endpoints only.
    pub snapshot_every: usize,
    /// Accepted steps between monitor samples; at least 1.
    pub monitor_every: usize,
    /// Exponents `p` for which the Lp energy-identity defect is monitored.
    pub lp_exponents: Vec<f64>,
    /// Extra Lq norms monitored beyond the built-in 2, 3 and infinity.
    pub lq_extra: Vec<f64>,
    /// Relative tolerance of the conjugate-gradient solves.
    pub linear_tol: f64,
}

impl SolverConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        SolverConfig {
            scheme,
            dt_initial: dt,
            dt_max: dt,
            safety: 0.9,
            positivity_floor: 1e-12,
            blow_up_threshold: 1e12,
            t_end,
            snapshot_every: 0,
            monitor_every: 1,
            lp_exponents: Vec::new(),
            lq_extra: Vec::new(),
            linear_tol: 1e-12,
        }
    }

    fn validate(&self) -> Result<()> {
        let pos = [
            self.dt_initial,
            self.dt_max,
            self.safety,
            self.positivity_floor,
            self.blow_up_threshold,
            self.t_end,
            self.linear_tol,
        ];
        if pos.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(String::from("solver config fields must be positive and finite")));
        }
        if self.safety > 1.0 {
            return Err(Error::InvalidInput(String::from("safety factor must lie in (0, 1]")));
        }
        if self.monitor_every == 0 {
            return Err(Error::InvalidInput(String::from("monitor cadence must be at least 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    BlowUp { t: f64 },
    SolverFailure { t: f64, reason: String },
}

impl Termination {
    pub fn kind(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::BlowUp { .. } => "blow_up",
            Termination::SolverFailure { .. } => "solver_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub snapshots: Vec<StateField>,
    pub monitors: MonitorBundle,
    pub termination: Termination,
    pub steps: u64,
    pub clamp_events: u64,
    /// Total tau- and volume-weighted mass added by clamping.
    pub clamp_correction_total: f64,
}

/// One accepted (or rejected) step.
struct StepOutcome {
    state: StateField,
    finite: bool,
    clamp_events: u64,
    /// tau- and volume-weighted mass added by the clamp.
    clamp_correction: f64,
    /// Relative residual of the worst linear solve (semi-implicit only).
    linear_residual: f64,
}

/// Flux-form discrete Laplacian with mirror (zero-flux) boundary: each
/// interior face's flux is accumulated antisymmetrically into both cells.
pub(crate) fn laplacian_flux(grid: &Grid, w: &[f64], out: &mut [f64]) {
    let (nx, ny) = (grid.nx(), grid.ny());
    out.fill(0.0);
    let inv_hx2 = 1.0 / (grid.hx() * grid.hx());
    for iy in 0..ny {
        let row = iy * nx;
        for ix in 0..nx.saturating_sub(1) {
            let c = row + ix;
            let flux = (w[c + 1] - w[c]) * inv_hx2;
            out[c] += flux;
            out[c + 1] -= flux;
        }
    }
    if ny > 1 {
        let inv_hy2 = 1.0 / (grid.hy() * grid.hy());
        for iy in 0..ny - 1 {
            for ix in 0..nx {
                let c = iy * nx + ix;
                let flux = (w[c + nx] - w[c]) * inv_hy2;
                out[c] += flux;
                out[c + nx] -= flux;
            }
        }
    }
}

/// Evaluates `d` at every cell; species-major like [`StateField`].
fn diffusion_fields(m: &ModelSpec, s: &StateField) -> Result<Vec<f64>> {
    let n = m.species();
    let cells = s.cells();
    let mut u = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut out = vec![0.0; n * cells];
    for c in 0..cells {
        s.cell_state(c, &mut u);
        for v in u.iter_mut() {
            if *v < 0.0 {
                *v = 0.0; // floor round-off noise before evaluating the law
            }
        }
        m.diffusion().eval_into(&u, &mut d);
        for i in 0..n {
            out[i * cells + c] = d[i];
        }
    }
    Ok(out)
}

fn reaction_fields(m: &ModelSpec, s: &StateField) -> Result<Vec<f64>> {
    let n = m.species();
    let cells = s.cells();
    let mut u = vec![0.0; n];
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n * cells];
    for c in 0..cells {
        s.cell_state(c, &mut u);
        for v in u.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        m.reaction().eval_into(&u, &mut f);
        for i in 0..n {
            out[i * cells + c] = f[i];
        }
    }
    Ok(out)
}

/// Discrete Laplacian of `w_i = d_i(u) u_i` for one species; the sum over
/// all cells vanishes up to roundoff (exact zero-flux).
pub fn discrete_flux_divergence(
    m: &ModelSpec,
    grid: &Grid,
    s: &StateField,
    species: usize,
) -> Result<Vec<f64>> {
    if species >= m.species() || s.species() != m.species() || s.cells() != grid.cells() {
        return Err(Error::InvalidInput(String::from("species index or field shape mismatch")));
    }
    let d = diffusion_fields(m, s)?;
    let cells = grid.cells();
    let ui = s.species_slice(species);
    let w: Vec<f64> = (0..cells).map(|c| d[species * cells + c] * ui[c]).collect();
    let mut out = vec![0.0; cells];
    laplacian_flux(grid, &w, &mut out);
    Ok(out)
}

fn clamp_state(
    state: &mut StateField,
    floor: f64,
    tau: &[f64],
    vol: f64,
) -> (u64, f64) {
    let mut events = 0u64;
    let mut correction = 0.0;
    let cells = state.cells();
    for s in 0..state.species() {
        let slice = state.species_slice_mut(s);
        for v in slice.iter_mut().take(cells) {
            if *v < floor {
                correction += tau[s] * (floor - *v) * vol;
                *v = floor;
                events += 1;
            }
        }
    }
    (events, correction)
}

/// Forward Euler step `u^{n+1} = u^n + (dt/tau)(Lap(d u) + f(u))`, clamped
/// at the positivity floor.
pub fn step_explicit(
    m: &ModelSpec,
    grid: &Grid,
    s: &StateField,
    dt: f64,
    floor: f64,
) -> Result<StateField> {
    let outcome = step_explicit_inner(m, grid, s, dt, floor)?;
    if !outcome.finite {
        return Err(Error::SolverFailure(String::from("non-finite state after explicit step")));
    }
    Ok(outcome.state)
}

fn step_explicit_inner(
    m: &ModelSpec,
    grid: &Grid,
    s: &StateField,
    dt: f64,
    floor: f64,
) -> Result<StepOutcome> {
    let n = m.species();
    let cells = grid.cells();
    let tau = m.tau().as_slice();
    let d = diffusion_fields(m, s)?;
    let f = reaction_fields(m, s)?;
    let mut next = s.clone();
    let mut w = vec![0.0; cells];
    let mut lap = vec![0.0; cells];
    for i in 0..n {
        let ui = s.species_slice(i);
        for c in 0..cells {
            w[c] = d[i * cells + c] * ui[c];
        }
        laplacian_flux(grid, &w, &mut lap);
        let out = next.species_slice_mut(i);
        let r = dt / tau[i];
        for c in 0..cells {
            out[c] = ui[c] + r * (lap[c] + f[i * cells + c]);
        }
    }
    let finite = next.all_finite();
    let (clamp_events, clamp_correction) = if finite {
        clamp_state(&mut next, floor, tau, grid.cell_volume())
    } else {
        (0, 0.0)
    };
    Ok(StepOutcome { state: next, finite, clamp_events, clamp_correction, linear_residual: 0.0 })
}

/// Jacobi-preconditioned conjugate gradients for the SPD system built by the
/// semi-implicit step. Returns the solution and the final relative residual.
fn conjugate_gradient(
    apply: &dyn Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    x0: Vec<f64>,
    tol_rel: f64,
    max_iter: usize,
) -> core::result::Result<(Vec<f64>, f64), String> {
    let n = b.len();
    let bnorm = b.iter().map(|&v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], 0.0));
    }
    let mut x = x0;
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(&bi, &axi)| bi - axi).collect();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(&ri, &di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(&a, &b)| a * b).sum();
    let target = tol_rel * bnorm;
    let mut res = r.iter().map(|&v| v * v).sum::<f64>().sqrt();
    if res <= target {
        return Ok((x, res / bnorm));
    }
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(&a, &b)| a * b).sum();
        if pap <= 0.0 || !pap.is_finite() {
            return Err(String::from("conjugate gradients lost positive definiteness"));
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        res = r.iter().map(|&v| v * v).sum::<f64>().sqrt();
        if res <= target {
            return Ok((x, res / bnorm));
        }
        for k in 0..n {
            z[k] = r[k] / diag[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(&a, &b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(format_residual(res / bnorm))
}

fn format_residual(rel: f64) -> String {
    let mut s = String::from("conjugate gradients stalled at relative residual ");
    // no_std float formatting via core::fmt
    use core::fmt::Write;
    let _ = write!(s, "{rel:e}");
    s
}

/// Semi-implicit step: `d` frozen at level `n`, implicit in `u_i` only.
/// For each species solves
/// `(tau_i/dt) u^{n+1} - Lap(d_i(u^n) u^{n+1}) = (tau_i/dt) u^n + f_i(u^n)`
/// via the SPD substitution `v = d u^{n+1}`, then rebuilds the state with one
/// conservative flux application so discrete mass is exact to roundoff.
pub fn step_semi_implicit(
    m: &ModelSpec,
    grid: &Grid,
    s: &StateField,
    dt: f64,
    floor: f64,
    linear_tol: f64,
) -> Result<StateField> {
    let outcome = step_semi_implicit_inner(m, grid, s, dt, floor, linear_tol)?;
    if !outcome.finite {
        return Err(Error::SolverFailure(String::from("non-finite state after semi-implicit step")));
    }
    Ok(outcome.state)
}

fn step_semi_implicit_inner(
    m: &ModelSpec,
    grid: &Grid,
    s: &StateField,
    dt: f64,
    floor: f64,
    linear_tol: f64,
) -> Result<StepOutcome> {
    let n = m.species();
    let cells = grid.cells();
    let tau = m.tau().as_slice();
    let d = diffusion_fields(m, s)?;
    let f = reaction_fields(m, s)?;
    let mut next = s.clone();
    let mut worst_residual = 0.0f64;

    let inv_hx2 = 1.0 / (grid.hx() * grid.hx());
    let inv_hy2 = 1.0 / (grid.hy() * grid.hy());
    for i in 0..n {
        let di = &d[i * cells..(i + 1) * cells];
        if di.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::SolverFailure(String::from(
                "diffusion coefficient lost positivity; the law violates its lower bound",
            )));
        }
        let ui = s.species_slice(i);
        let sigma = tau[i] / dt;
        let rhs: Vec<f64> = (0..cells).map(|c| sigma * ui[c] + f[i * cells + c]).collect();
        // Diagonal of (sigma D^{-1} - Lap): sigma/d_c plus the face count.
        let diag: Vec<f64> = (0..cells)
            .map(|c| {
                let ix = c % grid.nx();
                let iy = c / grid.nx();
                let mut faces = 0.0;
                if grid.nx() > 1 {
                    let inner = if ix == 0 || ix == grid.nx() - 1 { 1.0 } else { 2.0 };
                    faces += inner * inv_hx2;
                }
                if grid.ny() > 1 {
                    let inner = if iy == 0 || iy == grid.ny() - 1 { 1.0 } else { 2.0 };
                    faces += inner * inv_hy2;
                }
                sigma / di[c] + faces
            })
            .collect();
        let apply = |v: &[f64], out: &mut [f64]| {
            laplacian_flux(grid, v, out);
            for c in 0..cells {
                out[c] = sigma * v[c] / di[c] - out[c];
            }
        };
        let v0: Vec<f64> = (0..cells).map(|c| di[c] * ui[c]).collect();
        let max_iter = 10 * cells + 200;
        let (v, rel) = conjugate_gradient(&apply, &diag, &rhs, v0, linear_tol, max_iter)
            .map_err(Error::SolverFailure)?;
        worst_residual = worst_residual.max(rel);
        // Conservative rebuild: u^{n+1} = u^n + (dt/tau)(Lap v + f).
        let mut lap = vec![0.0; cells];
        laplacian_flux(grid, &v, &mut lap);
        let out = next.species_slice_mut(i);
        let r = dt / tau[i];
        for c in 0..cells {
            out[c] = ui[c] + r * (lap[c] + f[i * cells + c]);
        }
    }
    let finite = next.all_finite();
    let (clamp_events, clamp_correction) = if finite {
        clamp_state(&mut next, floor, tau, grid.cell_volume())
    } else {
        (0, 0.0)
    };
    Ok(StepOutcome {
        state: next,
        finite,
        clamp_events,
        clamp_correction,
        linear_residual: worst_residual,
    })
}

/// Stable/accurate step suggestion. Explicit: the parabolic stability bound
/// `safety * tau_min / (2 D_max sum_axis h_axis^-2)` with `D_max` the largest
/// row sum of the diffusion Jacobian over cells. Semi-implicit: the accuracy
/// target `dt_initial`, capped at `dt_max`.
pub fn suggest_dt(m: &ModelSpec, grid: &Grid, s: &StateField, cfg: &SolverConfig) -> Result<f64> {
    match cfg.scheme {
        Scheme::SemiImplicit => Ok(cfg.dt_initial.min(cfg.dt_max)),
        Scheme::Explicit => {
            let cells = grid.cells();
            let mut u = vec![0.0; m.species()];
            let mut d_max = 0.0f64;
            for c in 0..cells {
                s.cell_state(c, &mut u);
                for v in u.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                let a = m.diffusion_jacobian(&u)?;
                d_max = d_max.max(a.inf_norm());
            }
            if d_max <= 0.0 {
                return Ok(cfg.dt_max);
            }
            let mut inv_h2 = 0.0;
            if grid.nx() > 1 {
                inv_h2 += 1.0 / (grid.hx() * grid.hx());
            }
            if grid.ny() > 1 {
                inv_h2 += 1.0 / (grid.hy() * grid.hy());
            }
            if inv_h2 == 0.0 {
                return Ok(cfg.dt_max);
            }
            let dt = cfg.safety * m.tau().min() / (2.0 * d_max * inv_h2);
            Ok(dt.min(cfg.dt_max))
        }
    }
}

/// Advances the system to `t_end` (or blow-up / solver failure), recording
/// snapshots and monitor samples at the configured cadences. The time step is
/// `min(dt_initial, dt_max)` clipped to land on `t_end` exactly; stability of
/// explicit runs is the caller's responsibility ([`suggest_dt`] provides the
/// bound), and instability surfaces as a blow-up termination.
pub fn run(m: &ModelSpec, grid: &Grid, u0: &StateField, cfg: &SolverConfig) -> Result<RunResult> {
    cfg.validate()?;
    if u0.species() != m.species() || u0.cells() != grid.cells() {
        return Err(Error::InvalidInput(String::from("initial state shape mismatch")));
    }
    if !u0.all_finite() || !u0.is_nonnegative() {
        return Err(Error::Domain(String::from("initial state must be nonnegative and finite")));
    }
    if u0.is_zero() {
        return Err(Error::Domain(String::from("initial state must not be identically zero")));
    }

    let metadata = RunMetadata {
        grid_dim: grid.dim(),
        grid_cells: [grid.nx(), grid.ny()],
        grid_lengths: [grid.lx(), grid.ly()],
        model_fingerprint: m.fingerprint(),
        positivity_floor: cfg.positivity_floor,
        entropy_zero_convention: true,
    };
    let mut bundle = MonitorBundle::new(&cfg.lp_exponents, &cfg.lq_extra, metadata);

    let mut state = u0.clone();
    state.set_t(0.0);
    let mut snapshots = vec![state.clone()];
    let mut steps = 0u64;
    let mut clamp_events = 0u64;
    let mut clamp_correction_total = 0.0f64;
    let mut termination = Termination::Completed;

    // First monitor sample at t = 0.
    monitors::record_sample(&mut bundle, m, grid, None, &state, 0.0, cfg, 0, 0.0, 0.0)?;
    let mut last_snapshot_step = 0u64;

    let dt_nominal = cfg.dt_initial.min(cfg.dt_max);
    let t_tiny = 1e-12 * cfg.t_end.max(dt_nominal);
    while state.t() < cfg.t_end - t_tiny {
        let dt = dt_nominal.min(cfg.t_end - state.t());
        let outcome = match cfg.scheme {
            Scheme::Explicit => step_explicit_inner(m, grid, &state, dt, cfg.positivity_floor),
            Scheme::SemiImplicit => {
                step_semi_implicit_inner(m, grid, &state, dt, cfg.positivity_floor, cfg.linear_tol)
            }
        };
        let outcome = match outcome {
            Ok(o) => o,
            Err(Error::SolverFailure(reason)) => {
                termination = Termination::SolverFailure { t: state.t(), reason };
                break;
            }
            Err(e) => return Err(e),
        };
        if !outcome.finite {
            termination = Termination::BlowUp { t: state.t() };
            break;
        }
        if outcome.state.max_abs() > cfg.blow_up_threshold {
            termination = Termination::BlowUp { t: state.t() };
            break;
        }
        let prev = state;
        state = outcome.state;
        state.set_t(prev.t() + dt);
        steps += 1;
        clamp_events += outcome.clamp_events;
        clamp_correction_total += outcome.clamp_correction;

        let finished = state.t() >= cfg.t_end - t_tiny;
        if steps % cfg.monitor_every as u64 == 0 || finished {
            monitors::record_sample(
                &mut bundle,
                m,
                grid,
                Some(&prev),
                &state,
                dt,
                cfg,
                clamp_events,
                outcome.clamp_correction,
                outcome.linear_residual,
            )?;
        }
        if cfg.snapshot_every > 0 && steps % cfg.snapshot_every as u64 == 0 {
            snapshots.push(state.clone());
            last_snapshot_step = steps;
        }
        if finished {
            break;
        }
    }
    if last_snapshot_step != steps {
        snapshots.push(state.clone());
    }
    Ok(RunResult {
        snapshots,
        monitors: bundle,
        termination,
        steps,
        clamp_events,
        clamp_correction_total,
    })
}
