//! Deciders for the structural hypotheses of the four global-existence
//! theorems: closed forms where the SKT coefficient tables admit one,
//! deterministic sampling over a state box otherwise.
//!
//! Sampling covers the box corners, its coordinate faces and a Halton
//! low-discrepancy sweep of the interior; the seed offsets the Halton index
//! stream, so identical seeds reproduce identical verdicts and witnesses.
//! Box-limited results are always labelled `holds-on-box`, never
//! `holds-closed-form`: the hypotheses quantify over the whole nonnegative
//! orthant and a box certificate is only that.

// Float methods (ln, exp, powf, ...) for pure no_std dependency graphs; when a
// std crate sits anywhere in the graph the inherent methods shadow these.
#[allow(unused_imports)]
use num_traits::Float as _;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use serde::Serialize;

use crate::model::{GrowthClass, ModelSpec, PresetTag, SKTCoefficients};
use crate::{Error, Result};

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Tolerance below which a sampled `f_i` on a zero face counts as a
/// quasi-positivity violation, and above which a sampled reaction sum counts
/// as a mass-dissipation violation.
const SIGN_TOL: f64 = 1e-12;

/// Relative eigenvalue slack for positive-semidefiniteness verdicts:
/// `lambda_min >= -PSD_SLACK * (1 + ||M||)`.
const PSD_SLACK: f64 = 1e-9;

/// Points on the diagonal scan used to detect genuine ratio growth.
const DIAG_SCAN_POINTS: usize = 64;

/// Log-log slope above which a monotone ratio increase over the outer 20%
/// of radii counts as genuine growth rather than saturation toward a bound.
/// A bare monotonicity test misfires: a box-bounded ratio such as
/// `u^2/(1+u^2)` still increases monotonically on any finite box, with
/// log-log slope up to ~0.2 near the box edge, while a genuine polynomial
/// class violation carries a full extra power (slope ~ 1). 0.5 separates
/// the two regimes.
const GROWTH_SLOPE_TOL: f64 = 0.5;

/// Van der Corput radical inverse of `index` in the given prime base;
/// the `k`-th coordinate of a Halton point uses the `k`-th prime.
pub fn radical_inverse(index: u64, base: u64) -> f64 {
    let mut i = index;
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Componentwise box in state space with a deterministic sampling plan.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
    count: usize,
    seed: u64,
}

impl SampleBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, count: usize, seed: u64) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidInput(String::from("box bounds must be non-empty and equal length")));
        }
        if lower.len() > PRIMES.len() {
            return Err(Error::InvalidInput(String::from("box dimension exceeds supported species count")));
        }
        if count == 0 {
            return Err(Error::InvalidInput(String::from("sample count must be at least 1")));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::Domain(String::from("box requires finite lower <= upper componentwise")));
            }
            if *lo < 0.0 {
                return Err(Error::Domain(String::from("state boxes live in the nonnegative orthant")));
            }
        }
        Ok(SampleBox { lower, upper, count, seed })
    }

    /// Uniform box `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64, count: usize, seed: u64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n], count, seed)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_interior(&self) -> bool {
        self.lower.iter().all(|&v| v > 0.0)
    }

    /// Copy with the lower corner clamped up to `floor` (for checks that
    /// need a strictly interior box).
    pub fn clamped_interior(&self, floor: f64) -> Result<SampleBox> {
        let lower: Vec<f64> = self.lower.iter().map(|&v| v.max(floor)).collect();
        let upper: Vec<f64> =
            self.upper.iter().zip(&lower).map(|(&hi, &lo)| hi.max(lo)).collect();
        SampleBox::new(lower, upper, self.count, self.seed)
    }

    fn halton_point(&self, index: u64) -> Vec<f64> {
        (0..self.dim())
            .map(|k| {
                let t = radical_inverse(index, PRIMES[k]);
                self.lower[k] + t * (self.upper[k] - self.lower[k])
            })
            .collect()
    }

    /// Deterministic sample set: corners, then per-axis lower/upper face
    /// sweeps, then the interior Halton block offset by the seed.
    pub fn samples(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::new();
        if n <= 12 {
            for mask in 0..(1usize << n) {
                out.push(
                    (0..n)
                        .map(|k| if mask >> k & 1 == 1 { self.upper[k] } else { self.lower[k] })
                        .collect(),
                );
            }
        }
        let per_face = (self.count / (4 * n)).max(4);
        for axis in 0..n {
            for side in 0..2 {
                let fixed = if side == 0 { self.lower[axis] } else { self.upper[axis] };
                for k in 0..per_face {
                    let idx = self.seed + k as u64 + 1;
                    let mut p = Vec::with_capacity(n);
                    let mut slot = 0;
                    for j in 0..n {
                        if j == axis {
                            p.push(fixed);
                        } else {
                            let t = radical_inverse(idx, PRIMES[slot]);
                            p.push(self.lower[j] + t * (self.upper[j] - self.lower[j]));
                            slot += 1;
                        }
                    }
                    out.push(p);
                }
            }
        }
        for k in 0..self.count {
            out.push(self.halton_point(self.seed + k as u64 + 1));
        }
        out
    }

    /// Samples on the hyperplane `u_axis = 0` with the remaining coordinates
    /// swept over the box: the face corners plus a Halton sweep.
    fn zero_face_samples(&self, axis: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::new();
        let free: Vec<usize> = (0..n).filter(|&j| j != axis).collect();
        if n <= 12 {
            for mask in 0..(1usize << free.len()) {
                let mut p = vec![0.0; n];
                for (bit, &j) in free.iter().enumerate() {
                    p[j] = if mask >> bit & 1 == 1 { self.upper[j] } else { self.lower[j] };
                }
                out.push(p);
            }
        }
        let sweep = (self.count / n.max(1)).max(8);
        for k in 0..sweep {
            let idx = self.seed + k as u64 + 1;
            let mut p = vec![0.0; n];
            for (slot, &j) in free.iter().enumerate() {
                let t = radical_inverse(idx, PRIMES[slot]);
                p[j] = self.lower[j] + t * (self.upper[j] - self.lower[j]);
            }
            out.push(p);
        }
        out
    }

    /// Points along the box diagonal, used by the growth/decay trend scans.
    fn diagonal_scan(&self) -> Vec<Vec<f64>> {
        (0..DIAG_SCAN_POINTS)
            .map(|k| {
                let s = k as f64 / (DIAG_SCAN_POINTS - 1) as f64;
                self.lower
                    .iter()
                    .zip(&self.upper)
                    .map(|(&lo, &hi)| lo + s * (hi - lo))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictStatus {
    #[serde(rename = "holds-closed-form")]
    HoldsClosedForm,
    #[serde(rename = "holds-on-box")]
    HoldsOnBox,
    #[serde(rename = "fails")]
    Fails,
}

impl VerdictStatus {
    pub fn holds(self) -> bool {
        !matches!(self, VerdictStatus::Fails)
    }
}

/// Where a failed condition was observed: a concrete state, or the
/// instantiated closed-form inequality for coefficient-level checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    State(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub name: String,
    pub status: VerdictStatus,
    pub witness: Option<Witness>,
    /// Fitted constant: the `C` of a growth bound or the `delta` of a
    /// coercivity bound.
    pub constant: Option<f64>,
    /// Upper constant for two-sided fits (the `C` of `delta <= d(u).u <= C`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_upper: Option<f64>,
    /// Positive weights of a detailed-balance certificate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConditionVerdict {
    fn new(name: &str, status: VerdictStatus) -> Self {
        ConditionVerdict {
            name: name.to_string(),
            status,
            witness: None,
            constant: None,
            constant_upper: None,
            constants: None,
            note: None,
        }
    }

    pub fn holds(&self) -> bool {
        self.status.holds()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplicabilityStatus {
    Applies,
    Fails,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremVerdict {
    pub status: ApplicabilityStatus,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failed: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub undetermined: Vec<String>,
    /// Hypotheses taken on faith rather than checked (the a priori `llogl`
    /// bound of the Lq theorem).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub assumed: Vec<String>,
}

impl TheoremVerdict {
    pub fn applies(&self) -> bool {
        self.status == ApplicabilityStatus::Applies
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorems {
    #[serde(rename = "Thm1")]
    pub thm1: TheoremVerdict,
    #[serde(rename = "Thm2")]
    pub thm2: TheoremVerdict,
    #[serde(rename = "Thm3")]
    pub thm3: TheoremVerdict,
    #[serde(rename = "Thm4")]
    pub thm4: TheoremVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub verdicts: Vec<ConditionVerdict>,
    pub theorems: Theorems,
}

impl ConditionReport {
    pub fn any_applies(&self) -> bool {
        self.theorems.thm1.applies()
            || self.theorems.thm2.applies()
            || self.theorems.thm3.applies()
            || self.theorems.thm4.applies()
    }

    pub fn verdict(&self, name: &str) -> Option<&ConditionVerdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

fn norm2(u: &[f64]) -> f64 {
    u.iter().map(|&v| v * v).sum::<f64>().sqrt()
}

/// Quasi-positivity: `f_i(u) >= 0` whenever `u_i = 0` and the other
/// components are nonnegative. Sampled on each zero face of the box.
pub fn check_quasi_positive(m: &ModelSpec, sbox: &SampleBox) -> Result<ConditionVerdict> {
    require_dim(m, sbox)?;
    let mut verdict = ConditionVerdict::new("qp", VerdictStatus::HoldsOnBox);
    let mut worst = f64::INFINITY;
    for axis in 0..m.species() {
        for u in sbox.zero_face_samples(axis) {
            let f = m.eval_f(&u)?;
            worst = worst.min(f[axis]);
            if f[axis] < -SIGN_TOL {
                verdict.status = VerdictStatus::Fails;
                verdict.witness = Some(Witness::State(u));
                verdict.constant = Some(worst);
                return Ok(verdict);
            }
        }
    }
    verdict.constant = Some(worst);
    Ok(verdict)
}

/// Total mass dissipation: `sum_i f_i(u) <= 0` on the sampled box.
pub fn check_mass_dissipation(m: &ModelSpec, sbox: &SampleBox) -> Result<ConditionVerdict> {
    require_dim(m, sbox)?;
    let mut verdict = ConditionVerdict::new("tmd", VerdictStatus::HoldsOnBox);
    let mut worst = f64::NEG_INFINITY;
    for u in sbox.samples() {
        let f = m.eval_f(&u)?;
        let total: f64 = f.iter().sum();
        worst = worst.max(total);
        if total > SIGN_TOL {
            verdict.status = VerdictStatus::Fails;
            verdict.witness = Some(Witness::State(u));
            verdict.constant = Some(worst);
            return Ok(verdict);
        }
    }
    verdict.constant = Some(worst);
    Ok(verdict)
}

/// Least-squares slope of `log(ratio)` against `log(radius)` over the given
/// window; `None` when the window is degenerate or the ratio vanishes.
fn log_log_slope(window: &[(f64, f64)]) -> Option<f64> {
    if window.len() < 2 || window.iter().any(|&(r, v)| r <= 0.0 || v <= 0.0) {
        return None;
    }
    let n = window.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(r, v) in window {
        sx += r.ln();
        sy += v.ln();
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(r, v) in window {
        let dx = r.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (v.ln() - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Trend over the outer 20% of diagonal radii. `sign = +1` detects genuine
/// growth (monotone increase with log-log slope above the tolerance),
/// `sign = -1` genuine decay toward zero.
fn diagonal_trend(values: &[(f64, f64)], sign: f64) -> bool {
    let tail = DIAG_SCAN_POINTS / 5;
    if values.len() < tail + 1 {
        return false;
    }
    let window = &values[values.len() - tail..];
    let monotone = window
        .windows(2)
        .all(|w| if sign > 0.0 { w[1].1 > w[0].1 } else { w[1].1 < w[0].1 });
    if !monotone {
        return false;
    }
    match log_log_slope(window) {
        Some(slope) => sign * slope > GROWTH_SLOPE_TOL,
        None => false,
    }
}

/// Growth-class ratios at a state; `None` when the class needs the diagonal
/// reaction derivative and the model lacks it.
fn growth_ratio(m: &ModelSpec, u: &[f64], class: GrowthClass) -> Result<f64> {
    let f = m.eval_f(u)?;
    let r = norm2(u);
    match class {
        GrowthClass::Linear => {
            // One-sided bound f_i(u) <= C (1 + u_i).
            let mut worst = 0.0f64;
            for (i, &fi) in f.iter().enumerate() {
                worst = worst.max(fi / (1.0 + u[i]));
            }
            Ok(worst)
        }
        GrowthClass::Quadratic => {
            let mut derivs = vec![0.0; m.species()];
            if !m.reaction().diag_derivative(u, &mut derivs) {
                return Err(Error::Capability(String::from(
                    "growth class requires the diagonal reaction derivative evaluator",
                )));
            }
            let rf = norm2(&f) / (1.0 + r * r);
            let rd = derivs.iter().map(|&d| (-d).max(0.0)).fold(0.0f64, f64::max) / (1.0 + r);
            Ok(rf.max(rd))
        }
        GrowthClass::Cubic => {
            let mut derivs = vec![0.0; m.species()];
            if !m.reaction().diag_derivative(u, &mut derivs) {
                return Err(Error::Capability(String::from(
                    "growth class requires the diagonal reaction derivative evaluator",
                )));
            }
            let rf = f.iter().map(|&v| v.abs()).fold(0.0f64, f64::max) / (1.0 + r * r * r);
            let rd =
                derivs.iter().map(|&d| (-d).max(0.0)).fold(0.0f64, f64::max) / (1.0 + r * r);
            Ok(rf.max(rd))
        }
        GrowthClass::Custom => Err(Error::Capability(String::from(
            "growth check requires a concrete class (linear, quadratic or cubic)",
        ))),
    }
}

/// Fits the smallest constant of the class inequalities over the box and
/// flags genuine ratio growth along the box diagonal.
///
/// Linear means the one-sided `f_i <= C(1+u_i)`; quadratic pairs
/// `|f| <= C(1+|u|^2)` with the derivative bound `df_i/du_i >= -C(1+|u|)`;
/// cubic pairs `|f_i| <= C(1+|u|^3)` with `df_i/du_i >= -C(1+|u|^2)`.
pub fn check_growth(m: &ModelSpec, sbox: &SampleBox, class: GrowthClass) -> Result<ConditionVerdict> {
    require_dim(m, sbox)?;
    let name = match class {
        GrowthClass::Linear => "linear",
        GrowthClass::Quadratic => "quad",
        GrowthClass::Cubic => "cubic2",
        GrowthClass::Custom => "custom-growth",
    };
    let mut fitted = 0.0f64;
    for u in sbox.samples() {
        fitted = fitted.max(growth_ratio(m, &u, class)?);
    }
    let mut trend = Vec::with_capacity(DIAG_SCAN_POINTS);
    for u in sbox.diagonal_scan() {
        trend.push((norm2(&u), growth_ratio(m, &u, class)?));
    }
    let mut verdict = ConditionVerdict::new(name, VerdictStatus::HoldsOnBox);
    if diagonal_trend(&trend, 1.0) {
        verdict.status = VerdictStatus::Fails;
        verdict.witness = Some(Witness::State(sbox.upper().to_vec()));
        verdict.note = Some(String::from("ratio grows monotonically along the box diagonal"));
    } else {
        verdict.constant = Some(fitted);
    }
    Ok(verdict)
}

/// Diffusion derivative matrix at a sample state: analytic when the law
/// carries an evaluator, otherwise central differences with step
/// `1e-6 max(1, |u_j|)` (one-sided at the boundary of the orthant). The
/// fallback exists only for sampling; solver paths demand the analytic form.
fn sampled_diffusion_derivatives(m: &ModelSpec, u: &[f64]) -> crate::linalg::SquareMatrix {
    let n = m.species();
    if let Some(jac) = m.diffusion().jacobian(u, n) {
        return jac;
    }
    let mut jac = crate::linalg::SquareMatrix::zeros(n);
    let mut probe = u.to_vec();
    let mut d_plus = vec![0.0; n];
    let mut d_minus = vec![0.0; n];
    for j in 0..n {
        let h = 1e-6 * u[j].abs().max(1.0);
        let centered = u[j] - h >= 0.0;
        probe[j] = u[j] + h;
        m.diffusion().eval_into(&probe, &mut d_plus);
        probe[j] = if centered { u[j] - h } else { u[j] };
        m.diffusion().eval_into(&probe, &mut d_minus);
        let denom = if centered { 2.0 * h } else { h };
        for i in 0..n {
            jac.set(i, j, (d_plus[i] - d_minus[i]) / denom);
        }
        probe[j] = u[j];
    }
    jac
}

fn mobility_at(m: &ModelSpec, u: &[f64]) -> Result<crate::linalg::SquareMatrix> {
    if m.diffusion().has_jacobian() {
        m.mobility_matrix(u)
    } else {
        let d = m.eval_d(u)?;
        Ok(crate::model::assemble_mobility(&sampled_diffusion_derivatives(m, u), &d, u))
    }
}

fn weighted_at(m: &ModelSpec, u: &[f64], alpha: f64) -> Result<crate::linalg::SquareMatrix> {
    if m.diffusion().has_jacobian() {
        m.weighted_matrix(u, alpha)
    } else {
        let d = m.eval_d(u)?;
        let a = crate::model::assemble_diffusion_jacobian(
            &sampled_diffusion_derivatives(m, u),
            &d,
            u,
        );
        Ok(crate::model::weight_entries(&a, u, alpha))
    }
}

/// Positive semidefiniteness of the mobility matrix `P(u)` over the box.
pub fn check_p_psd(m: &ModelSpec, sbox: &SampleBox) -> Result<ConditionVerdict> {
    require_dim(m, sbox)?;
    let mut verdict = ConditionVerdict::new("qpositive", VerdictStatus::HoldsOnBox);
    let mut min_eig = f64::INFINITY;
    for u in sbox.samples() {
        let p = mobility_at(m, &u)?;
        let eig = p.min_symmetric_eigenvalue();
        min_eig = min_eig.min(eig);
        if eig < -PSD_SLACK * (1.0 + p.inf_norm()) {
            verdict.status = VerdictStatus::Fails;
            verdict.witness = Some(Witness::State(u));
            verdict.constant = Some(min_eig);
            return Ok(verdict);
        }
    }
    verdict.constant = Some(min_eig);
    Ok(verdict)
}

fn require_two_species(c: &SKTCoefficients) -> Result<(f64, f64, f64, f64)> {
    if c.species() != 2 {
        return Err(Error::Capability(String::from("closed-form SKT conditions require N = 2")));
    }
    Ok((c.a().get(0, 0), c.a().get(0, 1), c.a().get(1, 0), c.a().get(1, 1)))
}

/// Closed form `a11 a21 = a22 a12 = 0` and
/// `(a12 + a21)^2 >= 16 (a12 a21 + 4 a11 a22)`; exact arithmetic test.
pub fn skt_condition_23r(c: &SKTCoefficients) -> Result<bool> {
    let (a11, a12, a21, a22) = require_two_species(c)?;
    Ok(a11 * a21 == 0.0
        && a22 * a12 == 0.0
        && (a12 + a21) * (a12 + a21) >= 16.0 * (a12 * a21 + 4.0 * a11 * a22))
}

/// Closed form `a12 = a21 = 0`; exact test.
pub fn skt_condition_25r(c: &SKTCoefficients) -> Result<bool> {
    let (_, a12, a21, _) = require_two_species(c)?;
    Ok(a12 == 0.0 && a21 == 0.0)
}

/// Closed form `4 a11 a22 >= (a12 + a21)^2` with `a11, a22 > 0`; exact test.
pub fn skt_condition_26r(c: &SKTCoefficients) -> Result<bool> {
    let (a11, a12, a21, a22) = require_two_species(c)?;
    Ok(a11 > 0.0 && a22 > 0.0 && 4.0 * a11 * a22 >= (a12 + a21) * (a12 + a21))
}

/// Closed form `64 a11 a22 >= a12 a21`; exact test.
pub fn check_yagi(c: &SKTCoefficients) -> Result<bool> {
    let (a11, a12, a21, a22) = require_two_species(c)?;
    Ok(64.0 * a11 * a22 >= a12 * a21)
}

/// Strict competition inequalities `a2 c1 > a1 c2` and `a1 b2 > a2 b1` on the
/// Lotka-Volterra table.
pub fn check_competition(c: &SKTCoefficients) -> Result<bool> {
    let lv = c
        .lv()
        .ok_or_else(|| Error::Capability(String::from("competition check requires the Lotka-Volterra table")))?;
    Ok(lv.a[1] * lv.c[0] > lv.a[0] * lv.c[1] && lv.a[0] * lv.b[1] > lv.a[1] * lv.b[0])
}

struct AlphaScan {
    min_eig: f64,
    argmin: Vec<f64>,
    argmin_alpha: f64,
    /// First sample (in enumeration order) violating the requested bound.
    violation: Option<(Vec<f64>, f64)>,
}

fn scan_a_alpha(m: &ModelSpec, sbox: &SampleBox, alphas: &[f64], delta: f64) -> Result<AlphaScan> {
    if !sbox.is_interior() {
        return Err(Error::Domain(String::from(
            "A_alpha sampling requires a strictly interior box (weights diverge at zero)",
        )));
    }
    if alphas.is_empty() || alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::Domain(String::from("alphas must be a non-empty list of positive reals")));
    }
    let mut scan = AlphaScan {
        min_eig: f64::INFINITY,
        argmin: sbox.lower().to_vec(),
        argmin_alpha: alphas[0],
        violation: None,
    };
    for u in sbox.samples() {
        for &alpha in alphas {
            let w = weighted_at(m, &u, alpha)?;
            let sym = w.plus_transpose();
            let eig = sym.min_symmetric_eigenvalue();
            if eig < scan.min_eig {
                scan.min_eig = eig;
                scan.argmin = u.clone();
                scan.argmin_alpha = alpha;
            }
            if scan.violation.is_none() && eig < delta - PSD_SLACK * (1.0 + sym.inf_norm()) {
                scan.violation = Some((u.clone(), alpha));
            }
        }
    }
    Ok(scan)
}

/// Coercivity of the weighted matrix: `A_alpha(u) + A_alpha(u)^t >= delta I`
/// over samples x alphas (`delta = 0` is the sign condition for the
/// `T = +infinity` theorem). The fitted constant is the smallest sampled
/// eigenvalue, i.e. the largest certified delta.
pub fn check_a_alpha(
    m: &ModelSpec,
    sbox: &SampleBox,
    alphas: &[f64],
    delta: f64,
) -> Result<ConditionVerdict> {
    require_dim(m, sbox)?;
    let scan = scan_a_alpha(m, sbox, alphas, delta)?;
    let name = if delta == 0.0 { "fundamental2" } else { "fundamental" };
    let mut verdict = ConditionVerdict::new(name, VerdictStatus::HoldsOnBox);
    match scan.violation {
        Some((u, alpha)) => {
            verdict.status = VerdictStatus::Fails;
            verdict.note = Some(format!("violating alpha = {alpha}"));
            verdict.witness = Some(Witness::State(u));
            verdict.constant = Some(scan.min_eig);
        }
        None => {
            verdict.constant = Some(scan.min_eig);
        }
    }
    Ok(verdict)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffusionBoundForm {
    /// `delta <= d(u).u <= C` (bounded form).
    Bounded,
    /// `delta |u|^2 <= d(u).u <= C(1 + |u|^2)` (quadratic form).
    Quadratic,
}

/// Fits both constants of the requested diffusion bound over the box.
/// Certificates are box-limited; the verdict carries the asymptotic caveat.
pub fn check_diffusion_bounds(
    m: &ModelSpec,
    sbox: &SampleBox,
    form: DiffusionBoundForm,
) -> Result<ConditionVerdict> {
    require_dim(m, sbox)?;
    let name = match form {
        DiffusionBoundForm::Bounded => "diffusion2",
        DiffusionBoundForm::Quadratic => "diffusion",
    };
    let ratio = |u: &[f64]| -> Result<Option<f64>> {
        let d = m.eval_d(u)?;
        let val: f64 = d.iter().zip(u).map(|(&di, &ui)| di * ui).sum();
        match form {
            DiffusionBoundForm::Bounded => Ok(Some(val)),
            DiffusionBoundForm::Quadratic => {
                let r2 = u.iter().map(|&v| v * v).sum::<f64>();
                if r2 == 0.0 {
                    Ok(None) // 0/0: the quadratic ratio has no value at the origin
                } else {
                    Ok(Some(val / r2))
                }
            }
        }
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut lo_witness: Option<Vec<f64>> = None;
    for u in sbox.samples() {
        if let Some(r) = ratio(&u)? {
            if r < lo {
                lo = r;
                lo_witness = Some(u.clone());
            }
            hi = hi.max(r);
        }
    }
    let mut verdict = ConditionVerdict::new(name, VerdictStatus::HoldsOnBox);
    verdict.note = Some(String::from("box-limited certificate; asymptotic range unverified"));
    if !lo.is_finite() || lo <= SIGN_TOL {
        verdict.status = VerdictStatus::Fails;
        verdict.witness = Some(
            lo_witness.map(Witness::State).unwrap_or_else(|| Witness::State(sbox.lower().to_vec())),
        );
        verdict.note = Some(String::from("no positive lower constant exists on the box"));
        return Ok(verdict);
    }
    let mut trend = Vec::with_capacity(DIAG_SCAN_POINTS);
    for u in sbox.diagonal_scan() {
        if let Some(r) = ratio(&u)? {
            trend.push((norm2(&u), r));
        }
    }
    if diagonal_trend(&trend, -1.0) {
        verdict.status = VerdictStatus::Fails;
        verdict.witness = Some(Witness::State(sbox.upper().to_vec()));
        verdict.note = Some(String::from(
            "lower ratio decays monotonically along the box diagonal; no uniform delta",
        ));
        return Ok(verdict);
    }
    verdict.constant = Some(lo);
    verdict.constant_upper = Some(hi);
    Ok(verdict)
}

/// Detailed balance: existence of weights `pi > 0` with
/// `pi_i a_ij = pi_j a_ji`. Weights are assigned along a spanning forest of
/// the nonzero-coupling graph and every remaining edge is verified with
/// relative tolerance 1e-12 (Kolmogorov-style cycle consistency).
pub fn check_detailed_balance(c: &SKTCoefficients) -> ConditionVerdict {
    let n = c.species();
    let a = c.a();
    let mut verdict = ConditionVerdict::new("balance", VerdictStatus::HoldsClosedForm);
    let mut pi = vec![0.0f64; n];
    let mut visited = vec![false; n];
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        pi[root] = 1.0;
        let mut queue = vec![root];
        while let Some(i) = queue.pop() {
            for j in 0..n {
                if i == j || visited[j] {
                    continue;
                }
                let (aij, aji) = (a.get(i, j), a.get(j, i));
                if aij == 0.0 && aji == 0.0 {
                    continue;
                }
                if aij == 0.0 || aji == 0.0 {
                    verdict.status = VerdictStatus::Fails;
                    verdict.witness = Some(Witness::Text(format!(
                        "pair ({i},{j}): a_ij = {aij}, a_ji = {aji}; one-sided coupling admits no positive weights"
                    )));
                    return verdict;
                }
                pi[j] = pi[i] * aij / aji;
                visited[j] = true;
                queue.push(j);
            }
        }
    }
    // Verify every edge, tree or not.
    for i in 0..n {
        for j in (i + 1)..n {
            let (aij, aji) = (a.get(i, j), a.get(j, i));
            if aij == 0.0 && aji == 0.0 {
                continue;
            }
            if aij == 0.0 || aji == 0.0 {
                verdict.status = VerdictStatus::Fails;
                verdict.witness = Some(Witness::Text(format!(
                    "pair ({i},{j}): a_ij = {aij}, a_ji = {aji}; one-sided coupling admits no positive weights"
                )));
                return verdict;
            }
            let lhs = pi[i] * aij;
            let rhs = pi[j] * aji;
            if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(rhs.abs()) {
                verdict.status = VerdictStatus::Fails;
                verdict.witness = Some(Witness::Text(format!(
                    "cycle inconsistency at pair ({i},{j}): pi_i a_ij = {lhs} vs pi_j a_ji = {rhs}"
                )));
                return verdict;
            }
        }
    }
    // Normalize so the smallest weight is one.
    let min_pi = pi.iter().copied().fold(f64::INFINITY, f64::min).max(1e-300);
    for p in &mut pi {
        *p /= min_pi;
    }
    verdict.constants = Some(pi);
    verdict
}

/// Reaction-entropy bound `sum_i f_i(u) log u_i <= C (1 + |u|^order)` fitted
/// on a strictly interior box, `order` 2 or 3.
pub fn check_reaction_entropy_bound(
    m: &ModelSpec,
    sbox: &SampleBox,
    order: u32,
) -> Result<ConditionVerdict> {
    require_dim(m, sbox)?;
    if !sbox.is_interior() {
        return Err(Error::Domain(String::from(
            "reaction-entropy sampling requires a strictly interior box (log diverges at zero)",
        )));
    }
    if order != 2 && order != 3 {
        return Err(Error::InvalidInput(String::from("order must be 2 or 3")));
    }
    let name = if order == 2 { "28" } else { "eqn29" };
    let ratio = |u: &[f64]| -> Result<f64> {
        let f = m.eval_f(u)?;
        let s: f64 = f.iter().zip(u).map(|(&fi, &ui)| fi * ui.ln()).sum();
        let r = norm2(u);
        Ok(s / (1.0 + r.powi(order as i32)))
    };
    let mut fitted = 0.0f64;
    for u in sbox.samples() {
        fitted = fitted.max(ratio(&u)?);
    }
    let mut trend = Vec::with_capacity(DIAG_SCAN_POINTS);
    for u in sbox.diagonal_scan() {
        trend.push((norm2(&u), ratio(&u)?));
    }
    let mut verdict = ConditionVerdict::new(name, VerdictStatus::HoldsOnBox);
    if diagonal_trend(&trend, 1.0) {
        verdict.status = VerdictStatus::Fails;
        verdict.witness = Some(Witness::State(sbox.upper().to_vec()));
        verdict.note = Some(String::from("ratio grows monotonically along the box diagonal"));
    } else {
        verdict.constant = Some(fitted);
    }
    Ok(verdict)
}

/// Uniform lower diffusion bound `d_i(u) >= c0 > 0` sampled over the box.
fn check_asd(m: &ModelSpec, sbox: &SampleBox) -> Result<ConditionVerdict> {
    let c0 = m.diffusion().c0();
    let mut verdict = ConditionVerdict::new("asd", VerdictStatus::HoldsOnBox);
    let mut min_d = f64::INFINITY;
    for u in sbox.samples() {
        let d = m.eval_d(&u)?;
        for &di in &d {
            min_d = min_d.min(di);
        }
        if d.iter().any(|&di| di < c0 * (1.0 - 1e-9) - 1e-12) {
            verdict.status = VerdictStatus::Fails;
            verdict.witness = Some(Witness::State(u));
            verdict.constant = Some(min_d);
            return Ok(verdict);
        }
    }
    verdict.constant = Some(min_d);
    Ok(verdict)
}

fn require_dim(m: &ModelSpec, sbox: &SampleBox) -> Result<()> {
    if m.species() != sbox.dim() {
        return Err(Error::InvalidInput(String::from("sample box dimension must equal species count")));
    }
    Ok(())
}

/// Options for [`theorem_applicability_with`].
#[derive(Debug, Clone)]
pub struct ReportOptions {
    /// Exponent grid for the weighted-matrix scans.
    pub alphas: Vec<f64>,
    /// Lower clamp applied to the box for checks requiring strict interiority.
    pub interior_floor: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { alphas: vec![0.5, 1.0, 2.0, 5.0], interior_floor: 0.01 }
    }
}

/// Runs every relevant hypothesis check and maps the verdicts onto the four
/// theorems' hypothesis lists. Closed forms decide the SKT preset wherever
/// they are sound sufficient conditions; a sampled counterexample always
/// trumps a closed form, with the conflict recorded in the verdict note.
pub fn theorem_applicability(m: &ModelSpec, sbox: &SampleBox) -> ConditionReport {
    theorem_applicability_with(m, sbox, &ReportOptions::default())
}

pub fn theorem_applicability_with(
    m: &ModelSpec,
    sbox: &SampleBox,
    opts: &ReportOptions,
) -> ConditionReport {
    let mut verdicts: Vec<ConditionVerdict> = Vec::new();
    let mut failures: Vec<(String, String)> = Vec::new(); // (name, reason) for undetermined

    let push = |res: Result<ConditionVerdict>,
                    name: &str,
                    verdicts: &mut Vec<ConditionVerdict>,
                    failures: &mut Vec<(String, String)>| {
        match res {
            Ok(v) => verdicts.push(v),
            Err(e) => failures.push((name.to_string(), e.to_string())),
        }
    };

    push(check_asd(m, sbox), "asd", &mut verdicts, &mut failures);
    push(check_quasi_positive(m, sbox), "qp", &mut verdicts, &mut failures);
    push(check_mass_dissipation(m, sbox), "tmd", &mut verdicts, &mut failures);
    push(check_growth(m, sbox, GrowthClass::Linear), "linear", &mut verdicts, &mut failures);
    push(check_growth(m, sbox, GrowthClass::Quadratic), "quad", &mut verdicts, &mut failures);
    push(check_growth(m, sbox, GrowthClass::Cubic), "cubic2", &mut verdicts, &mut failures);
    push(check_p_psd(m, sbox), "qpositive", &mut verdicts, &mut failures);
    push(
        check_diffusion_bounds(m, sbox, DiffusionBoundForm::Bounded),
        "diffusion2",
        &mut verdicts,
        &mut failures,
    );
    push(
        check_diffusion_bounds(m, sbox, DiffusionBoundForm::Quadratic),
        "diffusion",
        &mut verdicts,
        &mut failures,
    );

    let interior = sbox.clamped_interior(opts.interior_floor);
    match interior {
        Ok(ibox) => {
            match check_a_alpha(m, &ibox, &opts.alphas, 0.0) {
                Ok(f2) => {
                    // Derive the strict version from the same scan: the
                    // fitted constant is the largest certified delta.
                    let mut f1 = f2.clone();
                    f1.name = String::from("fundamental");
                    if f2.status == VerdictStatus::Fails {
                        f1.status = VerdictStatus::Fails;
                    } else if f2.constant.unwrap_or(0.0) <= 0.0 {
                        f1.status = VerdictStatus::Fails;
                        f1.witness = Some(Witness::Text(format!(
                            "smallest sampled eigenvalue {} admits no positive delta",
                            f2.constant.unwrap_or(0.0)
                        )));
                    }
                    verdicts.push(f1);
                    verdicts.push(f2);
                }
                Err(e) => {
                    failures.push((String::from("fundamental"), e.to_string()));
                    failures.push((String::from("fundamental2"), e.to_string()));
                }
            }
            push(check_reaction_entropy_bound(m, &ibox, 2), "28", &mut verdicts, &mut failures);
            push(check_reaction_entropy_bound(m, &ibox, 3), "eqn29", &mut verdicts, &mut failures);
        }
        Err(e) => {
            for name in ["fundamental", "fundamental2", "28", "eqn29"] {
                failures.push((name.to_string(), e.to_string()));
            }
        }
    }

    // Closed forms for the SKT/semilinear presets (two species).
    if let Some(c) = m.skt_coefficients() {
        if c.species() == 2 && matches!(m.preset(), PresetTag::Skt | PresetTag::Semilinear) {
            apply_closed_forms(c, &mut verdicts);
        }
        verdicts.push(check_detailed_balance(c));
        if c.species() == 2 {
            if let Ok(yagi) = check_yagi(c) {
                verdicts.push(closed_bool_verdict("yagi", yagi, "64 a11 a22 >= a12 a21", c));
            }
            if let Ok(comp) = check_competition(c) {
                verdicts.push(closed_bool_verdict("a3", comp, "a2 c1 > a1 c2 and a1 b2 > a2 b1", c));
            }
        }
    }

    let theorems = compose_theorems(&verdicts, &failures);
    ConditionReport { verdicts, theorems }
}

fn closed_bool_verdict(name: &str, holds: bool, formula: &str, c: &SKTCoefficients) -> ConditionVerdict {
    let mut v = ConditionVerdict::new(
        name,
        if holds { VerdictStatus::HoldsClosedForm } else { VerdictStatus::Fails },
    );
    if !holds {
        let a = c.a();
        v.witness = Some(Witness::Text(format!(
            "{formula} fails at a = [[{}, {}], [{}, {}]]",
            a.get(0, 0),
            a.get(0, 1),
            a.get(1, 0),
            a.get(1, 1)
        )));
    }
    v
}

/// Promotes sampled verdicts to closed-form status where the coefficient
/// tables decide the hypothesis, recording any conflict between a closed
/// form and a sampled counterexample instead of hiding it.
fn apply_closed_forms(c: &SKTCoefficients, verdicts: &mut [ConditionVerdict]) {
    let c23 = skt_condition_23r(c).ok();
    let c25 = skt_condition_25r(c).ok();
    let c26 = skt_condition_26r(c).ok();
    for v in verdicts.iter_mut() {
        let (closed, tag) = match v.name.as_str() {
            "qpositive" => (c23, "(23r)"),
            "fundamental" | "fundamental2" => (c25, "(25r)"),
            "diffusion" => (c26, "(26r)"),
            _ => continue,
        };
        match (closed, v.status) {
            (Some(true), VerdictStatus::HoldsOnBox) => {
                v.status = VerdictStatus::HoldsClosedForm;
                v.note = Some(format!("certified by closed form {tag}"));
            }
            (Some(true), VerdictStatus::Fails) => {
                v.note = Some(format!(
                    "closed form {tag} holds but a sampled counterexample contradicts it; the sampled witness prevails"
                ));
            }
            (Some(false), VerdictStatus::HoldsOnBox) => {
                v.note = Some(format!("closed form {tag} fails; certificate is box-local only"));
            }
            _ => {}
        }
    }
}

fn compose_theorems(verdicts: &[ConditionVerdict], failures: &[(String, String)]) -> Theorems {
    let status = |name: &str| -> Option<bool> {
        if let Some(v) = verdicts.iter().find(|v| v.name == name) {
            Some(v.holds())
        } else {
            // Missing and recorded as an error: undetermined.
            debug_assert!(failures.iter().any(|(n, _)| n == name) || verdicts.is_empty());
            None
        }
    };
    let compose = |hypotheses: &[&str], assumed: &[&str]| -> TheoremVerdict {
        let mut failed = Vec::new();
        let mut undetermined = Vec::new();
        for &h in hypotheses {
            match status(h) {
                Some(true) => {}
                Some(false) => failed.push(h.to_string()),
                None => undetermined.push(h.to_string()),
            }
        }
        let status = if !failed.is_empty() {
            ApplicabilityStatus::Fails
        } else if !undetermined.is_empty() {
            ApplicabilityStatus::Undetermined
        } else {
            ApplicabilityStatus::Applies
        };
        TheoremVerdict {
            status,
            failed,
            undetermined,
            assumed: assumed.iter().map(|s| s.to_string()).collect(),
        }
    };
    Theorems {
        thm1: compose(&["asd", "qpositive", "diffusion2", "qp", "tmd", "quad"], &[]),
        thm2: compose(&["asd", "qpositive", "diffusion", "qp", "tmd", "cubic2"], &[]),
        thm3: compose(&["quad", "fundamental"], &["llogl"]),
        thm4: compose(&["fundamental2", "qp", "linear"], &[]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SquareMatrix;
    use crate::model::{
        DiffusionLaw, DiffusionModel, LotkaVolterra, ReactionLaw, ReactionModel, TauVector,
    };
    use alloc::boxed::Box;

    fn skt(a0: [f64; 2], a: [[f64; 2]; 2], reaction: ReactionModel) -> ModelSpec {
        let coeffs = SKTCoefficients::two_species(a0, a, None).unwrap();
        ModelSpec::skt(coeffs, TauVector::ones(2), reaction).unwrap()
    }

    fn coeffs(a: [[f64; 2]; 2]) -> SKTCoefficients {
        SKTCoefficients::two_species([1.0, 1.0], a, None).unwrap()
    }

    fn unit_box(n: usize, hi: f64) -> SampleBox {
        SampleBox::cube(n, 0.0, hi, 256, 7).unwrap()
    }

    #[test]
    fn quasi_positive_on_lv_and_dissipative_presets() {
        let lv = LotkaVolterra { a: [1.0, 2.0], b: [1.0, 3.0], c: [3.0, 1.0] };
        let m = skt([1.0, 1.0], [[1.0, 1.0], [1.0, 1.0]], ReactionModel::lotka_volterra(lv));
        let v = check_quasi_positive(&m, &unit_box(2, 10.0)).unwrap();
        assert_eq!(v.status, VerdictStatus::HoldsOnBox);

        let m2 = skt([1.0, 1.0], [[0.0; 2]; 2], ReactionModel::mass_dissipative());
        assert!(check_quasi_positive(&m2, &unit_box(2, 10.0)).unwrap().holds());
    }

    #[test]
    fn quasi_positive_fails_on_constant_negative_component() {
        let reaction = ReactionModel::new(
            ReactionLaw::Custom {
                eval: Box::new(|_u, out| {
                    out[0] = -1.0;
                    out[1] = 0.0;
                }),
                diag_derivative: None,
            },
            GrowthClass::Custom,
        );
        let m = skt([1.0, 1.0], [[0.0; 2]; 2], reaction);
        let v = check_quasi_positive(&m, &unit_box(2, 10.0)).unwrap();
        assert_eq!(v.status, VerdictStatus::Fails);
        match v.witness {
            Some(Witness::State(u)) => assert_eq!(u[0], 0.0, "witness must sit on the u_1 = 0 face"),
            other => panic!("expected state witness, got {other:?}"),
        }
    }

    #[test]
    fn mass_dissipation_verdicts() {
        let m = skt([1.0, 1.0], [[0.0; 2]; 2], ReactionModel::mass_dissipative());
        assert!(check_mass_dissipation(&m, &unit_box(2, 10.0)).unwrap().holds());

        let m0 = skt([1.0, 1.0], [[0.0; 2]; 2], ReactionModel::zero());
        assert!(check_mass_dissipation(&m0, &unit_box(2, 10.0)).unwrap().holds());

        // Lotka-Volterra with positive intrinsic growth: sum f > 0 near small u.
        let lv = LotkaVolterra { a: [1.0, 1.0], b: [1.0, 0.0], c: [0.0, 1.0] };
        let mlv = skt([1.0, 1.0], [[1.0, 1.0], [1.0, 1.0]], ReactionModel::lotka_volterra(lv));
        let v = check_mass_dissipation(&mlv, &unit_box(2, 10.0)).unwrap();
        assert_eq!(v.status, VerdictStatus::Fails);
        assert!(v.witness.is_some());
    }

    #[test]
    fn growth_class_fits() {
        let lv = LotkaVolterra { a: [1.0, 1.0], b: [1.0, 0.0], c: [0.0, 1.0] };
        let m = skt([1.0, 1.0], [[0.0; 2]; 2], ReactionModel::lotka_volterra(lv));
        let v = check_growth(&m, &unit_box(2, 10.0), GrowthClass::Quadratic).unwrap();
        assert!(v.holds(), "LV is quadratic: {v:?}");
        assert!(v.constant.unwrap() > 0.0 && v.constant.unwrap() < 10.0);

        // f_i = -u_i is of (one-sided) linear growth with a tiny constant.
        let decay = ReactionModel::new(
            ReactionLaw::Custom {
                eval: Box::new(|u, out| {
                    for (o, &ui) in out.iter_mut().zip(u) {
                        *o = -ui;
                    }
                }),
                diag_derivative: Some(Box::new(|_u, out| out.fill(-1.0))),
            },
            GrowthClass::Linear,
        );
        let md = skt([1.0, 1.0], [[0.0; 2]; 2], decay);
        let v = check_growth(&md, &unit_box(2, 10.0), GrowthClass::Linear).unwrap();
        assert!(v.holds());
        assert!(v.constant.unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn growth_detects_cubic_reaction_failing_quadratic_class() {
        let cubic = ReactionModel::new(
            ReactionLaw::Custom {
                eval: Box::new(|u, out| {
                    out[0] = u[0] * u[0] * u[0];
                    out[1] = 0.0;
                }),
                diag_derivative: Some(Box::new(|u, out| {
                    out[0] = 3.0 * u[0] * u[0];
                    out[1] = 0.0;
                })),
            },
            GrowthClass::Custom,
        );
        let m = skt([1.0, 1.0], [[0.0; 2]; 2], cubic);
        let v = check_growth(&m, &unit_box(2, 10.0), GrowthClass::Quadratic).unwrap();
        assert_eq!(v.status, VerdictStatus::Fails);
    }

    #[test]
    fn growth_requires_derivative_evaluator() {
        let reaction = ReactionModel::new(
            ReactionLaw::Custom { eval: Box::new(|_u, out| out.fill(0.0)), diag_derivative: None },
            GrowthClass::Custom,
        );
        let m = skt([1.0, 1.0], [[0.0; 2]; 2], reaction);
        assert!(matches!(
            check_growth(&m, &unit_box(2, 10.0), GrowthClass::Quadratic),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn p_psd_small_box_holds_large_box_fails() {
        // One-sided cross diffusion: P is PSD near the origin but indefinite
        // once a12 u1 dominates, so the verdict depends on the box.
        let m = skt([1.0, 1.0], [[0.0, 4.0], [0.0, 0.0]], ReactionModel::zero());
        let small = check_p_psd(&m, &unit_box(2, 1.0)).unwrap();
        assert!(small.holds(), "{small:?}");
        let large = check_p_psd(&m, &unit_box(2, 10.0)).unwrap();
        assert_eq!(large.status, VerdictStatus::Fails);
        assert!(large.witness.is_some());
    }

    #[test]
    fn p_psd_diagonal_coefficients_hold_everywhere() {
        // With a12 = a21 = 0 the mobility matrix is diagonal nonnegative.
        let m = skt([1.0, 1.0], [[1.0, 0.0], [0.0, 1.0]], ReactionModel::zero());
        let v = check_p_psd(&m, &unit_box(2, 10.0)).unwrap();
        assert!(v.holds(), "diagonal P is PSD: {v:?}");
    }

    #[test]
    fn closed_form_23r_examples() {
        assert!(skt_condition_23r(&coeffs([[1.0, 4.0], [0.0, 0.0]])).unwrap());
        assert!(!skt_condition_23r(&coeffs([[1.0, 0.0], [0.0, 1.0]])).unwrap());
        assert!(skt_condition_23r(&coeffs([[0.0; 2]; 2])).unwrap());
    }

    #[test]
    fn closed_form_25r_examples() {
        assert!(skt_condition_25r(&coeffs([[3.0, 0.0], [0.0, 2.0]])).unwrap());
        assert!(!skt_condition_25r(&coeffs([[0.0, 1e-9], [0.0, 0.0]])).unwrap());
        assert!(!skt_condition_25r(&coeffs([[1.0, 1.0], [1.0, 1.0]])).unwrap());
    }

    #[test]
    fn closed_form_26r_examples() {
        assert!(skt_condition_26r(&coeffs([[1.0, 1.0], [1.0, 1.0]])).unwrap());
        assert!(!skt_condition_26r(&coeffs([[1.0, 3.0], [0.0, 1.0]])).unwrap());
        assert!(!skt_condition_26r(&coeffs([[0.0, 0.0], [0.0, 1.0]])).unwrap());
    }

    #[test]
    fn yagi_and_competition_examples() {
        assert!(check_yagi(&coeffs([[1.0, 8.0], [8.0, 1.0]])).unwrap());
        assert!(!check_yagi(&coeffs([[0.0, 1.0], [1.0, 0.0]])).unwrap());
        assert!(check_yagi(&coeffs([[0.0; 2]; 2])).unwrap());

        let with_lv = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
            SKTCoefficients::two_species(
                [1.0, 1.0],
                [[0.0; 2]; 2],
                Some(LotkaVolterra { a, b, c }),
            )
            .unwrap()
        };
        assert!(!check_competition(&with_lv([1.0, 2.0], [1.0, 1.0], [1.0, 1.0])).unwrap());
        assert!(check_competition(&with_lv([2.0, 2.0], [1.0, 3.0], [3.0, 1.0])).unwrap());
        assert!(!check_competition(&with_lv([0.0; 2], [0.0; 2], [0.0; 2])).unwrap());
        assert!(matches!(check_competition(&coeffs([[0.0; 2]; 2])), Err(Error::Capability(_))));
    }

    #[test]
    fn a_alpha_diagonal_coefficients_certify_delta() {
        // a12 = a21 = 0: A_alpha is diagonal, eigenvalues 2(a_i0 + 2 a_ii u_i).
        let m = skt([1.0, 1.0], [[0.5, 0.0], [0.0, 0.25]], ReactionModel::zero());
        let sbox = SampleBox::cube(2, 0.01, 10.0, 256, 3).unwrap();
        let v = check_a_alpha(&m, &sbox, &[0.5, 1.0, 2.0, 5.0], 0.0).unwrap();
        assert!(v.holds());
        assert!(v.constant.unwrap() >= 2.0 - 1e-9, "delta = {:?}", v.constant);
    }

    #[test]
    fn a_alpha_semilinear_delta_is_twice_min_diffusion() {
        let m = ModelSpec::semilinear(vec![2.0, 3.0], TauVector::ones(2), ReactionModel::zero())
            .unwrap();
        let sbox = SampleBox::cube(2, 0.01, 10.0, 128, 3).unwrap();
        let v = check_a_alpha(&m, &sbox, &[1.0], 0.0).unwrap();
        assert!(v.holds());
        assert!((v.constant.unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn a_alpha_large_cross_term_fails_on_wide_box() {
        let m = skt([1.0, 1.0], [[0.0, 4.0], [0.0, 0.0]], ReactionModel::zero());
        let sbox = SampleBox::cube(2, 0.01, 10.0, 256, 3).unwrap();
        let v = check_a_alpha(&m, &sbox, &[0.5, 1.0, 2.0, 5.0], 0.0).unwrap();
        assert_eq!(v.status, VerdictStatus::Fails);
        assert!(v.witness.is_some());
    }

    #[test]
    fn a_alpha_rejects_box_touching_zero() {
        let m = skt([1.0, 1.0], [[0.0; 2]; 2], ReactionModel::zero());
        assert!(matches!(
            check_a_alpha(&m, &unit_box(2, 10.0), &[1.0], 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn diffusion_bounds_quadratic_form() {
        // (26r)-satisfying coefficients: quadratic lower bound holds with
        // delta at least the symmetric-part eigenvalue floor (here zero).
        let m = skt([1.0, 1.0], [[1.0, 1.0], [1.0, 1.0]], ReactionModel::zero());
        let v = check_diffusion_bounds(&m, &unit_box(2, 10.0), DiffusionBoundForm::Quadratic)
            .unwrap();
        assert!(v.holds(), "{v:?}");
        assert!(v.constant.unwrap() > 0.0);
        assert!(v.constant_upper.unwrap() >= v.constant.unwrap());
    }

    #[test]
    fn diffusion_bounds_semilinear_quadratic_lower_fails() {
        // d constant: d.u / |u|^2 ~ 1/|u| decays; no uniform quadratic delta.
        let m =
            ModelSpec::semilinear(vec![1.0, 1.0], TauVector::ones(2), ReactionModel::zero()).unwrap();
        let v = check_diffusion_bounds(&m, &unit_box(2, 10.0), DiffusionBoundForm::Quadratic)
            .unwrap();
        assert_eq!(v.status, VerdictStatus::Fails);
    }

    #[test]
    fn diffusion_bounds_manufactured_bounded_form() {
        // d(u).u = 1 on a single species: bounded form with delta = C = 1.
        let diffusion = DiffusionModel::new(
            DiffusionLaw::Custom {
                eval: Box::new(|u: &[f64], out: &mut [f64]| out[0] = 1.0 / u[0]),
                jacobian: None,
            },
            0.5,
        )
        .unwrap();
        let m = ModelSpec::custom(1, TauVector::ones(1), diffusion, ReactionModel::zero()).unwrap();
        let sbox = SampleBox::new(vec![0.5], vec![2.0], 64, 1).unwrap();
        let v = check_diffusion_bounds(&m, &sbox, DiffusionBoundForm::Bounded).unwrap();
        assert!(v.holds());
        assert!((v.constant.unwrap() - 1.0).abs() < 1e-12);
        assert!((v.constant_upper.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detailed_balance_examples() {
        let v = check_detailed_balance(&coeffs([[0.0, 2.0], [3.0, 0.0]]));
        assert!(v.holds());
        let pi = v.constants.unwrap();
        assert!((pi[0] * 2.0 - pi[1] * 3.0).abs() <= 1e-12 * (pi[0] * 2.0));

        let v2 = check_detailed_balance(&coeffs([[0.0, 0.0], [1.0, 0.0]]));
        assert_eq!(v2.status, VerdictStatus::Fails);

        let v3 = check_detailed_balance(&coeffs([[1.0, 2.0], [2.0, 1.0]]));
        assert!(v3.holds());
        assert_eq!(v3.constants.unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn detailed_balance_cycle_consistency_three_species() {
        // pi ratios: 2/1, 6/1 around the triangle; consistent cycle.
        let a = SquareMatrix::from_rows(&[
            &[0.0, 2.0, 1.0],
            &[1.0, 0.0, 3.0],
            &[6.0, 1.0, 0.0],
        ]);
        // Edge (0,1): pi1/pi0 = 2; edge (0,2): pi2/pi0 = 1/6;
        // edge (1,2): need pi2/pi1 = 3 -> pi2 = 6 pi0: inconsistent with 1/6.
        let c = SKTCoefficients::new(vec![1.0, 1.0, 1.0], a, None).unwrap();
        let v = check_detailed_balance(&c);
        assert_eq!(v.status, VerdictStatus::Fails);

        // Consistent variant: a_21 chosen so the cycle closes.
        let a_ok = SquareMatrix::from_rows(&[
            &[0.0, 2.0, 1.0],
            &[1.0, 0.0, 1.0],
            &[6.0, 12.0, 0.0],
        ]);
        let c_ok = SKTCoefficients::new(vec![1.0, 1.0, 1.0], a_ok.clone(), None).unwrap();
        let v_ok = check_detailed_balance(&c_ok);
        assert!(v_ok.holds(), "{v_ok:?}");
        let pi = v_ok.constants.unwrap();
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let lhs = pi[i] * a_ok.get(i, j);
            let rhs = pi[j] * a_ok.get(j, i);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()));
        }
    }

    #[test]
    fn reaction_entropy_bound_fits() {
        let zero = skt([1.0, 1.0], [[0.0; 2]; 2], ReactionModel::zero());
        let ibox = SampleBox::cube(2, 0.01, 10.0, 128, 5).unwrap();
        let v = check_reaction_entropy_bound(&zero, &ibox, 2).unwrap();
        assert!(v.holds());
        assert_eq!(v.constant.unwrap(), 0.0);

        // f_i = -u_i: sum -u_i log u_i peaks at N/e; tiny fitted constant.
        let decay = ReactionModel::new(
            ReactionLaw::Custom {
                eval: Box::new(|u, out| {
                    for (o, &ui) in out.iter_mut().zip(u) {
                        *o = -ui;
                    }
                }),
                diag_derivative: Some(Box::new(|_u, out| out.fill(-1.0))),
            },
            GrowthClass::Linear,
        );
        let m = skt([1.0, 1.0], [[0.0; 2]; 2], decay);
        let v = check_reaction_entropy_bound(&m, &ibox, 2).unwrap();
        assert!(v.holds());
        assert!(v.constant.unwrap() <= 2.0 / core::f64::consts::E + 1e-9);

        let lv = LotkaVolterra { a: [1.0, 1.0], b: [1.0, 0.0], c: [0.0, 1.0] };
        let mlv = skt([1.0, 1.0], [[0.0; 2]; 2], ReactionModel::lotka_volterra(lv));
        assert!(check_reaction_entropy_bound(&mlv, &ibox, 2).unwrap().holds());

        assert!(matches!(
            check_reaction_entropy_bound(&zero, &unit_box(2, 10.0), 2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn applicability_semilinear_dissipative_gives_thm4() {
        let m = ModelSpec::semilinear(
            vec![1.0, 1.0],
            TauVector::ones(2),
            ReactionModel::mass_dissipative(),
        )
        .unwrap();
        let report = theorem_applicability(&m, &unit_box(2, 10.0));
        assert!(report.theorems.thm4.applies(), "{:?}", report.theorems.thm4);
        assert_eq!(report.theorems.thm3.assumed, vec![String::from("llogl")]);
    }

    #[test]
    fn applicability_skt_25r_dissipative_gives_thm3() {
        let m = skt([1.0, 1.0], [[1.0, 0.0], [0.0, 1.0]], ReactionModel::mass_dissipative());
        let report = theorem_applicability(&m, &unit_box(2, 10.0));
        assert!(report.theorems.thm3.applies(), "{:?}", report.theorems.thm3);
        let fundamental = report.verdict("fundamental").unwrap();
        assert_eq!(fundamental.status, VerdictStatus::HoldsClosedForm);
    }

    #[test]
    fn applicability_lv_growth_breaks_mass_dissipation() {
        let lv = LotkaVolterra { a: [2.0, 2.0], b: [1.0, 3.0], c: [3.0, 1.0] };
        let m = skt([1.0, 1.0], [[1.0, 1.0], [1.0, 1.0]], ReactionModel::lotka_volterra(lv));
        let report = theorem_applicability(&m, &unit_box(2, 10.0));
        for thm in [&report.theorems.thm1, &report.theorems.thm2] {
            assert_eq!(thm.status, ApplicabilityStatus::Fails);
            assert!(thm.failed.iter().any(|h| h == "tmd"), "{thm:?}");
        }
        let tmd = report.verdict("tmd").unwrap();
        assert_eq!(tmd.status, VerdictStatus::Fails);
        assert!(tmd.witness.is_some());
        assert!(!report.any_applies());
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let m = skt([1.0, 1.0], [[0.0, 4.0], [0.0, 0.0]], ReactionModel::mass_dissipative());
        let b1 = SampleBox::cube(2, 0.0, 10.0, 200, 42).unwrap();
        let b2 = SampleBox::cube(2, 0.0, 10.0, 200, 42).unwrap();
        assert_eq!(
            theorem_applicability(&m, &b1),
            theorem_applicability(&m, &b2)
        );
    }

    #[test]
    fn enlarging_the_box_does_not_rescue_failures() {
        let m = skt([1.0, 1.0], [[1.0, 1.0], [1.0, 1.0]], ReactionModel::zero());
        for hi in [5.0, 10.0, 20.0] {
            let sbox = SampleBox::cube(2, 0.01, hi, 128, 11).unwrap();
            let v = check_a_alpha(&m, &sbox, &[0.5, 1.0, 2.0, 5.0], 0.0).unwrap();
            assert_eq!(v.status, VerdictStatus::Fails, "box [0.01, {hi}]^2");
        }
    }

    #[test]
    fn fd_fallback_matches_analytic_jacobian_checks() {
        // d_i(u) = 1 + u_i^2 once with the analytic derivative and once
        // without; the sampling fallback must reproduce the verdicts and
        // the fitted constants to finite-difference accuracy.
        let make = |with_jacobian: bool| -> ModelSpec {
            let jacobian: Option<Box<dyn Fn(&[f64], &mut SquareMatrix) + Send + Sync>> =
                if with_jacobian {
                    Some(Box::new(|u: &[f64], out: &mut SquareMatrix| {
                        out.set(0, 0, 2.0 * u[0]);
                        out.set(0, 1, 0.0);
                        out.set(1, 0, 0.0);
                        out.set(1, 1, 2.0 * u[1]);
                    }))
                } else {
                    None
                };
            let diffusion = DiffusionModel::new(
                DiffusionLaw::Custom {
                    eval: Box::new(|u: &[f64], out: &mut [f64]| {
                        out[0] = 1.0 + u[0] * u[0];
                        out[1] = 1.0 + u[1] * u[1];
                    }),
                    jacobian,
                },
                1.0,
            )
            .unwrap();
            ModelSpec::custom(2, TauVector::ones(2), diffusion, ReactionModel::zero()).unwrap()
        };
        let analytic = make(true);
        let fallback = make(false);
        let sbox = SampleBox::cube(2, 0.01, 5.0, 64, 9).unwrap();
        let va = check_p_psd(&analytic, &sbox).unwrap();
        let vf = check_p_psd(&fallback, &sbox).unwrap();
        assert_eq!(va.status, vf.status);
        let (ca, cf) = (va.constant.unwrap(), vf.constant.unwrap());
        assert!((ca - cf).abs() <= 1e-6 * (1.0 + ca.abs()), "{ca} vs {cf}");

        let aa = check_a_alpha(&analytic, &sbox, &[1.0, 2.0], 0.0).unwrap();
        let af = check_a_alpha(&fallback, &sbox, &[1.0, 2.0], 0.0).unwrap();
        assert_eq!(aa.status, af.status);
        let (ca, cf) = (aa.constant.unwrap(), af.constant.unwrap());
        assert!((ca - cf).abs() <= 1e-5 * (1.0 + ca.abs()), "{ca} vs {cf}");
    }

    #[test]
    fn weighted_matrix_rejects_nonpositive_alpha() {
        let m = skt([1.0, 1.0], [[1.0, 0.0], [0.0, 1.0]], ReactionModel::zero());
        assert!(matches!(m.weighted_matrix(&[1.0, 1.0], 0.0), Err(Error::Domain(_))));
        assert!(matches!(m.weighted_matrix(&[1.0, 1.0], -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn halton_radical_inverse_known_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert_eq!(radical_inverse(1, 3), 1.0 / 3.0);
        assert_eq!(radical_inverse(2, 3), 2.0 / 3.0);
    }
}
