//! Functionals and inequality residuals evaluated on discrete states.
//!
//! The monitored quantities mirror the a priori estimates of the underlying
//! theory: the tau-weighted mass `sum_i tau_i int u_i`, the Boltzmann entropy
//! `E = sum_i tau_i int u_i (log u_i - 1)`, its dissipation
//! `int B(w)[grad w, grad w]` in the log variables `w_i = log u_i`, Lq and
//! L log L norms, time-integrated norm bounds, the Lp energy-identity defect
//! and the exponential sup-norm envelope.
//!
//! Conventions: the entropy integrand takes its continuity value 0 at `u = 0`;
//! every logarithm is evaluated at states clamped to the positivity floor;
//! face values of `u` are arithmetic means of the adjacent cells; residual
//! time derivatives are forward differences across one accepted step with
//! spatial terms frozen at the old state. These choices are recorded in the
//! run metadata.

// Float methods (ln, exp, powf, ...) for pure no_std dependency graphs; when a
// std crate sits anywhere in the graph the inherent methods shadow these.
#[allow(unused_imports)]
use num_traits::Float as _;

use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::{solve_dense, SquareMatrix};
use crate::model::ModelSpec;
use crate::solver::{Grid, SolverConfig, StateField};
use crate::{Error, Result};

/// One named time series; times strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorSeries {
    pub name: String,
    pub samples: Vec<(f64, f64)>,
}

impl MonitorSeries {
    pub fn new(name: &str) -> Self {
        MonitorSeries { name: String::from(name), samples: Vec::new() }
    }

    pub fn push(&mut self, t: f64, v: f64) {
        debug_assert!(self.samples.last().map_or(true, |&(tp, _)| t > tp));
        self.samples.push((t, v));
    }

    pub fn last_value(&self) -> Option<f64> {
        self.samples.last().map(|&(_, v)| v)
    }

    pub fn max_value(&self) -> f64 {
        self.samples.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Grid shape, model fingerprint and evaluation conventions of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub grid_dim: usize,
    pub grid_cells: [usize; 2],
    pub grid_lengths: [f64; 2],
    pub model_fingerprint: u64,
    pub positivity_floor: f64,
    /// Phi(0) = 0 by continuity; logs are floored.
    pub entropy_zero_convention: bool,
}

/// Entropy bookkeeping of a run: the functional, its dissipation, the
/// reaction source `sum_i int f_i(u) log u_i` and the per-step inequality
/// residual. All four series share their sample times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyLedger<'a> {
    pub entropy: &'a MonitorSeries,
    pub dissipation: &'a MonitorSeries,
    pub reaction_source: &'a MonitorSeries,
    pub inequality_residual: &'a MonitorSeries,
}

/// The full monitor ledger of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorBundle {
    pub metadata: RunMetadata,
    pub mass: MonitorSeries,
    pub entropy: MonitorSeries,
    pub dissipation: MonitorSeries,
    pub entropy_source: MonitorSeries,
    pub entropy_residual: MonitorSeries,
    pub linf: MonitorSeries,
    pub l2: MonitorSeries,
    pub l3: MonitorSeries,
    pub llogl: MonitorSeries,
    pub int_l2: MonitorSeries,
    pub int_l3: MonitorSeries,
    pub clamp_count: MonitorSeries,
    pub clamp_correction: MonitorSeries,
    pub linear_residual: MonitorSeries,
    pub lp_residuals: Vec<(f64, MonitorSeries)>,
    pub lq_extra: Vec<(f64, MonitorSeries)>,
    trapezoid_prev: Option<(f64, f64, f64)>,
    acc_int_l2: f64,
    acc_int_l3: f64,
}

impl MonitorBundle {
    pub fn new(lp_exponents: &[f64], lq_extra: &[f64], metadata: RunMetadata) -> Self {
        let lp_residuals = lp_exponents
            .iter()
            .map(|&p| (p, MonitorSeries::new("lp_residual")))
            .collect();
        let lq = lq_extra.iter().map(|&q| (q, MonitorSeries::new("lq"))).collect();
        MonitorBundle {
            metadata,
            mass: MonitorSeries::new("mass"),
            entropy: MonitorSeries::new("entropy"),
            dissipation: MonitorSeries::new("dissipation"),
            entropy_source: MonitorSeries::new("entropy_source"),
            entropy_residual: MonitorSeries::new("entropy_residual"),
            linf: MonitorSeries::new("linf"),
            l2: MonitorSeries::new("l2"),
            l3: MonitorSeries::new("l3"),
            llogl: MonitorSeries::new("llogl"),
            int_l2: MonitorSeries::new("int_l2"),
            int_l3: MonitorSeries::new("int_l3"),
            clamp_count: MonitorSeries::new("clamp_count"),
            clamp_correction: MonitorSeries::new("clamp_correction"),
            linear_residual: MonitorSeries::new("linear_residual"),
            lp_residuals,
            lq_extra: lq,
            trapezoid_prev: None,
            acc_int_l2: 0.0,
            acc_int_l3: 0.0,
        }
    }

    pub fn entropy_ledger(&self) -> EntropyLedger<'_> {
        EntropyLedger {
            entropy: &self.entropy,
            dissipation: &self.dissipation,
            reaction_source: &self.entropy_source,
            inequality_residual: &self.entropy_residual,
        }
    }
}

/// tau-weighted L1 mass `sum_cells sum_i tau_i u_i vol`.
pub fn mass(grid: &Grid, s: &StateField, tau: &[f64]) -> f64 {
    let vol = grid.cell_volume();
    let mut acc = 0.0;
    for i in 0..s.species() {
        let sum: f64 = s.species_slice(i).iter().sum();
        acc += tau[i] * sum * vol;
    }
    acc
}

#[inline]
fn phi(v: f64, floor: f64) -> f64 {
    if v <= 0.0 {
        0.0 // continuity value of s (log s - 1)
    } else {
        let s = v.max(floor);
        s * (s.ln() - 1.0)
    }
}

/// Boltzmann entropy `sum_i tau_i int Phi(u_i)` with `Phi(s) = s(log s - 1)`.
pub fn entropy(grid: &Grid, s: &StateField, tau: &[f64], floor: f64) -> f64 {
    let vol = grid.cell_volume();
    let mut acc = 0.0;
    for i in 0..s.species() {
        let sum: f64 = s.species_slice(i).iter().map(|&v| phi(v, floor)).sum();
        acc += tau[i] * sum * vol;
    }
    acc
}

/// Applies `body` to every interior face: arguments are the two adjacent cell
/// indices and the inverse face distance `1/h` along the face normal.
fn for_each_face(grid: &Grid, mut body: impl FnMut(usize, usize, f64)) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let inv_hx = 1.0 / grid.hx();
    for iy in 0..ny {
        for ix in 0..nx.saturating_sub(1) {
            let c = iy * nx + ix;
            body(c, c + 1, inv_hx);
        }
    }
    if ny > 1 {
        let inv_hy = 1.0 / grid.hy();
        for iy in 0..ny - 1 {
            for ix in 0..nx {
                let c = iy * nx + ix;
                body(c, c + nx, inv_hy);
            }
        }
    }
}

/// Entropy dissipation `int B(w)[grad w, grad w]` accumulated over faces,
/// with `B` evaluated at the floored arithmetic mean of the adjacent cells.
pub fn entropy_dissipation(m: &ModelSpec, grid: &Grid, s: &StateField, floor: f64) -> Result<f64> {
    let n = m.species();
    let vol = grid.cell_volume();
    let mut face_u = alloc::vec![0.0; n];
    let mut grad_w = alloc::vec![0.0; n];
    let mut acc = 0.0;
    let mut err: Option<Error> = None;
    for_each_face(grid, |left, right, inv_h| {
        if err.is_some() {
            return;
        }
        for i in 0..n {
            let ul = s.get(i, left).max(floor);
            let ur = s.get(i, right).max(floor);
            face_u[i] = (0.5 * (s.get(i, left) + s.get(i, right))).max(floor);
            grad_w[i] = (ur.ln() - ul.ln()) * inv_h;
        }
        match m.onsager_matrix(&face_u) {
            Ok(b) => acc += b.quadratic_form(&grad_w) * vol,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// Reaction source of the entropy balance, `sum_i int f_i(u) log u_i`, with
/// logs floored.
pub fn entropy_reaction_source(m: &ModelSpec, grid: &Grid, s: &StateField, floor: f64) -> f64 {
    let n = m.species();
    let vol = grid.cell_volume();
    let mut u = alloc::vec![0.0; n];
    let mut f = alloc::vec![0.0; n];
    let mut source = 0.0;
    for c in 0..s.cells() {
        s.cell_state(c, &mut u);
        for v in u.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        m.reaction().eval_into(&u, &mut f);
        for i in 0..n {
            source += f[i] * u[i].max(floor).ln() * vol;
        }
    }
    source
}

/// Defect of the entropy inequality across one accepted step:
/// `(E(next) - E(prev))/dt - sum_i int f_i(u_prev) log u_prev_i`.
/// Nonpositive up to discretization error when the mobility matrix is PSD
/// on the range of the states.
pub fn entropy_inequality_residual(
    m: &ModelSpec,
    grid: &Grid,
    s_prev: &StateField,
    s_next: &StateField,
    dt: f64,
    tau: &[f64],
    floor: f64,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(String::from("dt must be positive")));
    }
    let de = (entropy(grid, s_next, tau, floor) - entropy(grid, s_prev, tau, floor)) / dt;
    Ok(de - entropy_reaction_source(m, grid, s_prev, floor))
}

/// Lq norm over all species, `q >= 1` or `q = infinity`.
pub fn lq_norm(grid: &Grid, s: &StateField, q: f64) -> Result<f64> {
    if q.is_infinite() {
        let mut best = 0.0f64;
        for i in 0..s.species() {
            for &v in s.species_slice(i) {
                best = best.max(v.abs());
            }
        }
        return Ok(best);
    }
    if !(q >= 1.0) {
        return Err(Error::Domain(String::from("Lq norms require q >= 1")));
    }
    Ok(lq_pow(grid, s, q).powf(1.0 / q))
}

/// `sum_cells sum_i u_i^q vol` (the q-th power of the Lq norm).
fn lq_pow(grid: &Grid, s: &StateField, q: f64) -> f64 {
    let vol = grid.cell_volume();
    let mut acc = 0.0;
    for i in 0..s.species() {
        for &v in s.species_slice(i) {
            acc += v.abs().powf(q) * vol;
        }
    }
    acc
}

/// L log L surrogate `sum_i int u_i log(e + u_i)`; equivalent to the Orlicz
/// norm up to absolute constants, and monotone in `u`.
pub fn llogl_norm(grid: &Grid, s: &StateField) -> f64 {
    let vol = grid.cell_volume();
    let e = core::f64::consts::E;
    let mut acc = 0.0;
    for i in 0..s.species() {
        for &v in s.species_slice(i) {
            acc += v * (e + v).ln() * vol;
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeIntegrals {
    pub int_l3: f64,
    pub int_l2: f64,
}

/// Trapezoidal accumulation of `||u||_3^3` and `||u||_2^2` over a series of
/// timestamped states.
pub fn time_integral_norms(grid: &Grid, states: &[StateField]) -> Result<TimeIntegrals> {
    if states.len() < 2 {
        return Err(Error::InvalidInput(String::from("time integrals need at least two samples")));
    }
    let mut int_l3 = 0.0;
    let mut int_l2 = 0.0;
    for w in states.windows(2) {
        let dt = w[1].t() - w[0].t();
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(String::from("sample times must be strictly increasing")));
        }
        int_l3 += 0.5 * dt * (lq_pow(grid, &w[0], 3.0) + lq_pow(grid, &w[1], 3.0));
        int_l2 += 0.5 * dt * (lq_pow(grid, &w[0], 2.0) + lq_pow(grid, &w[1], 2.0));
    }
    Ok(TimeIntegrals { int_l3, int_l2 })
}

/// Discrete defect of the Lp energy identity across one step, summed over
/// species:
///
/// ```text
/// sum_i tau_i/(p+1) d/dt ||u_i||_{p+1}^{p+1}
///   + sum_faces sum_ij A_ij(u) grad u_j . grad u_i^p  -  sum_i (f_i(u), u_i^p)
/// ```
///
/// with the time derivative a forward difference and all spatial terms at the
/// old state.
pub fn lp_energy_residual(
    m: &ModelSpec,
    grid: &Grid,
    s_prev: &StateField,
    s_next: &StateField,
    dt: f64,
    p: f64,
    tau: &[f64],
) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Domain(String::from("the energy identity needs p > 0")));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(String::from("dt must be positive")));
    }
    let n = m.species();
    let vol = grid.cell_volume();
    let mut acc = 0.0;
    // Time-difference term.
    for i in 0..n {
        let prev: f64 = s_prev.species_slice(i).iter().map(|&v| v.abs().powf(p + 1.0)).sum();
        let next: f64 = s_next.species_slice(i).iter().map(|&v| v.abs().powf(p + 1.0)).sum();
        acc += tau[i] / (p + 1.0) * (next - prev) * vol / dt;
    }
    // Face-based bilinear diffusion term at the old state.
    let mut face_u = alloc::vec![0.0; n];
    let mut grad_u = alloc::vec![0.0; n];
    let mut grad_up = alloc::vec![0.0; n];
    let mut err: Option<Error> = None;
    for_each_face(grid, |left, right, inv_h| {
        if err.is_some() {
            return;
        }
        for i in 0..n {
            let ul = s_prev.get(i, left).max(0.0);
            let ur = s_prev.get(i, right).max(0.0);
            face_u[i] = 0.5 * (ul + ur);
            grad_u[i] = (ur - ul) * inv_h;
            grad_up[i] = (ur.powf(p) - ul.powf(p)) * inv_h;
        }
        match m.diffusion_jacobian(&face_u) {
            Ok(a) => {
                let mut bilinear = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        bilinear += a.get(i, j) * grad_u[j] * grad_up[i];
                    }
                }
                acc += bilinear * vol;
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    // Reaction pairing at the old state.
    let mut u = alloc::vec![0.0; n];
    let mut f = alloc::vec![0.0; n];
    for c in 0..s_prev.cells() {
        s_prev.cell_state(c, &mut u);
        for v in u.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        m.reaction().eval_into(&u, &mut f);
        for i in 0..n {
            acc -= f[i] * u[i].powf(p) * vol;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    pub c2: f64,
    pub c3: f64,
    pub ok: bool,
}

/// Least-squares slope of `(t, y)` pairs.
fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut st, mut sy) = (0.0, 0.0);
    for &(t, y) in points {
        st += t;
        sy += y;
    }
    let (mt, my) = (st / n, sy / n);
    let (mut stt, mut sty) = (0.0, 0.0);
    for &(t, y) in points {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (y - my);
    }
    if stt <= 0.0 {
        0.0
    } else {
        sty / stt
    }
}

/// Fits `||u||_inf <= C3 exp(C2 t)` to a sup-norm series by least squares in
/// log space, lifting the intercept so the envelope touches from above.
/// `ok` is false when the log-residuals show a super-linear growing trend,
/// i.e. the series grows faster than any exponential.
pub fn sup_norm_envelope(samples: &[(f64, f64)]) -> Result<EnvelopeFit> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput(String::from("envelope fit needs at least three samples")));
    }
    let t0 = samples[0].0;
    let span = samples[samples.len() - 1].0 - t0;
    if !(span > 0.0) {
        return Err(Error::InvalidInput(String::from("sample times must span a positive interval")));
    }
    let logs: Vec<(f64, f64)> =
        samples.iter().map(|&(t, v)| (t - t0, v.max(1e-300).ln())).collect();
    let n = logs.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in &logs {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let det = n * stt - st * st;
    let b = (n * sty - st * sy) / det;
    let a = (sy - b * st) / n;
    let mut max_res = f64::NEG_INFINITY;
    for &(t, y) in &logs {
        max_res = max_res.max(y - (a + b * t));
    }
    // Quadratic trend of the residuals: positive curvature plus positive end
    // slope means super-exponential growth.
    let mut normal = SquareMatrix::zeros(3);
    let mut rhs = [0.0f64; 3];
    for &(t, y) in &logs {
        let r = y - (a + b * t);
        let basis = [1.0, t, t * t];
        for i in 0..3 {
            for j in 0..3 {
                let v = normal.get(i, j) + basis[i] * basis[j];
                normal.set(i, j, v);
            }
            rhs[i] += basis[i] * r;
        }
    }
    let trend = solve_dense(&normal, &rhs).unwrap_or_else(|| alloc::vec![0.0; 3]);
    let curvature = trend[2] * (span / 2.0) * (span / 2.0);
    let y_range = logs.iter().map(|&(_, y)| y).fold(f64::NEG_INFINITY, f64::max)
        - logs.iter().map(|&(_, y)| y).fold(f64::INFINITY, f64::min);
    // Growth is judged on the data itself over the last 20% of the window;
    // a convex but decaying tail (relaxation toward a constant) is not
    // super-exponential growth.
    let tail = &logs[logs.len() - (logs.len() / 5).max(2)..];
    let end_slope = log_slope(tail);
    let super_linear = curvature > (0.02 * (1.0 + y_range)).max(1e-6) && end_slope > 0.0;
    Ok(EnvelopeFit { c2: b, c3: (a + max_res).exp(), ok: !super_linear })
}

/// Appends one sample row to every series in the bundle. `prev` is `None`
/// only for the initial sample, where step-residual monitors are zero.
#[allow(clippy::too_many_arguments)]
pub(crate) fn record_sample(
    bundle: &mut MonitorBundle,
    m: &ModelSpec,
    grid: &Grid,
    prev: Option<&StateField>,
    state: &StateField,
    dt: f64,
    cfg: &SolverConfig,
    clamp_events_cumulative: u64,
    clamp_correction_step: f64,
    linear_residual: f64,
) -> Result<()> {
    let t = state.t();
    let tau = m.tau().as_slice();
    let floor = cfg.positivity_floor;
    bundle.mass.push(t, mass(grid, state, tau));
    bundle.entropy.push(t, entropy(grid, state, tau, floor));
    if m.diffusion().has_jacobian() {
        bundle.dissipation.push(t, entropy_dissipation(m, grid, state, floor)?);
    }
    bundle.entropy_source.push(t, entropy_reaction_source(m, grid, state, floor));
    let er = match prev {
        Some(p) => entropy_inequality_residual(m, grid, p, state, dt, tau, floor)?,
        None => 0.0,
    };
    bundle.entropy_residual.push(t, er);
    let l2 = lq_norm(grid, state, 2.0)?;
    let l3 = lq_norm(grid, state, 3.0)?;
    bundle.linf.push(t, lq_norm(grid, state, f64::INFINITY)?);
    bundle.l2.push(t, l2);
    bundle.l3.push(t, l3);
    bundle.llogl.push(t, llogl_norm(grid, state));
    let (v2, v3) = (l2 * l2, l3 * l3 * l3);
    if let Some((tp, p2, p3)) = bundle.trapezoid_prev {
        bundle.acc_int_l2 += 0.5 * (t - tp) * (p2 + v2);
        bundle.acc_int_l3 += 0.5 * (t - tp) * (p3 + v3);
    }
    bundle.trapezoid_prev = Some((t, v2, v3));
    bundle.int_l2.push(t, bundle.acc_int_l2);
    bundle.int_l3.push(t, bundle.acc_int_l3);
    bundle.clamp_count.push(t, clamp_events_cumulative as f64);
    bundle.clamp_correction.push(t, clamp_correction_step);
    bundle.linear_residual.push(t, linear_residual);
    for (p, series) in bundle.lp_residuals.iter_mut() {
        let v = match prev {
            Some(sp) => lp_energy_residual(m, grid, sp, state, dt, *p, tau)?,
            None => 0.0,
        };
        series.push(t, v);
    }
    for (q, series) in bundle.lq_extra.iter_mut() {
        series.push(t, lq_norm(grid, state, *q)?);
    }
    Ok(())
}
