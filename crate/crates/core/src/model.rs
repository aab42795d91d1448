//! Diffusion and reaction laws, and the matrix structures derived from them.
//!
//! For a diffusion law `d = (d_i(u))` the derived objects are
//!
//! ```text
//! A_ij(u)       = (dd_i/du_j) u_i + delta_ij d_i(u)          diffusion Jacobian
//! A^alpha_ij(u) = A_ij(u) (u_i/u_j)^alpha                    weighted matrix
//! p_ij(u)       = (dd_i/du_j + dd_j/du_i) u_i u_j
//!                 + delta_ij (d_i(u) u_j + d_j(u) u_i)       mobility matrix
//! B_ij(u)       = A_ij(u) u_j                                Onsager matrix
//! ```
//!
//! `A` turns `Lap(d_i(u) u_i)` into divergence form, `P = B + B^t` controls
//! the sign of the entropy dissipation in log variables, and uniform
//! positivity of `A_alpha + A_alpha^t` underpins the Lq estimates.

// Float methods (ln, exp, powf, ...) for pure no_std dependency graphs; when a
// std crate sits anywhere in the graph the inherent methods shadow these.
#[allow(unused_imports)]
use num_traits::Float as _;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::SquareMatrix;
use crate::{Error, Result};

/// Per-species time constants; strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TauVector(Vec<f64>);

impl TauVector {
    pub fn new(tau: Vec<f64>) -> Result<Self> {
        if tau.is_empty() {
            return Err(Error::InvalidInput(String::from("tau must be non-empty")));
        }
        if tau.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::Domain(String::from("tau entries must be strictly positive")));
        }
        Ok(TauVector(tau))
    }

    pub fn ones(n: usize) -> Self {
        TauVector(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Lotka-Volterra competition table for two species:
/// `f_i(u) = (a_i - b_i u_1 - c_i u_2) u_i` with the convention that `b`
/// multiplies `u_1` and `c` multiplies `u_2` in both rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LotkaVolterra {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
}

impl LotkaVolterra {
    pub fn eval(&self, u: &[f64]) -> [f64; 2] {
        [
            (self.a[0] - self.b[0] * u[0] - self.c[0] * u[1]) * u[0],
            (self.a[1] - self.b[1] * u[0] - self.c[1] * u[1]) * u[1],
        ]
    }

    /// Diagonal derivatives `df_i/du_i`.
    pub fn diag_derivative(&self, u: &[f64]) -> [f64; 2] {
        [
            self.a[0] - 2.0 * self.b[0] * u[0] - self.c[0] * u[1],
            self.a[1] - self.b[1] * u[0] - 2.0 * self.c[1] * u[1],
        ]
    }
}

/// Coefficient tables of the SKT model: `d_i(u) = a_i0 + sum_j a_ij u_j`,
/// optionally paired with a Lotka-Volterra reaction table (two species).
#[derive(Debug, Clone, PartialEq)]
pub struct SKTCoefficients {
    a0: Vec<f64>,
    a: SquareMatrix,
    lv: Option<LotkaVolterra>,
}

impl SKTCoefficients {
    pub fn new(a0: Vec<f64>, a: SquareMatrix, lv: Option<LotkaVolterra>) -> Result<Self> {
        let n = a0.len();
        if n == 0 {
            return Err(Error::InvalidInput(String::from("a0 must be non-empty")));
        }
        if a.n() != n {
            return Err(Error::InvalidInput(String::from("a must be N x N with N = len(a0)")));
        }
        if a0.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Domain(String::from("a0 entries must be strictly positive")));
        }
        if a.data().iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::Domain(String::from("a entries must be nonnegative")));
        }
        if lv.is_some() && n != 2 {
            return Err(Error::Capability(String::from("Lotka-Volterra table requires N = 2")));
        }
        Ok(SKTCoefficients { a0, a, lv })
    }

    /// Two-species constructor from the flat tables
    /// `a0 = (a_10, a_20)` and `a = [[a11, a12], [a21, a22]]`.
    pub fn two_species(a0: [f64; 2], a: [[f64; 2]; 2], lv: Option<LotkaVolterra>) -> Result<Self> {
        Self::new(
            vec![a0[0], a0[1]],
            SquareMatrix::from_rows(&[&a[0], &a[1]]),
            lv,
        )
    }

    pub fn species(&self) -> usize {
        self.a0.len()
    }

    pub fn a0(&self) -> &[f64] {
        &self.a0
    }

    pub fn a(&self) -> &SquareMatrix {
        &self.a
    }

    pub fn lv(&self) -> Option<&LotkaVolterra> {
        self.lv.as_ref()
    }
}

/// Evaluator closures for user-supplied diffusion laws.
type DiffusionEval = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
/// Jacobian evaluator writing `dd_i/du_j` into a row-major matrix.
type DiffusionJacobianEval = Box<dyn Fn(&[f64], &mut SquareMatrix) + Send + Sync>;

pub enum DiffusionLaw {
    /// SKT law `d_i(u) = a_i0 + sum_j a_ij u_j`.
    SktLinear { a0: Vec<f64>, a: SquareMatrix },
    /// Constant (semilinear) diffusion `d_i(u) = d_i`.
    Constant(Vec<f64>),
    /// User supplied law; the analytic Jacobian is optional but operations
    /// deriving matrices fail without it (the conditions module may fall
    /// back to central differences during sampling).
    Custom { eval: DiffusionEval, jacobian: Option<DiffusionJacobianEval> },
}

impl fmt::Debug for DiffusionLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffusionLaw::SktLinear { a0, a } => {
                f.debug_struct("SktLinear").field("a0", a0).field("a", a).finish()
            }
            DiffusionLaw::Constant(d) => f.debug_tuple("Constant").field(d).finish(),
            DiffusionLaw::Custom { jacobian, .. } => f
                .debug_struct("Custom")
                .field("jacobian", &jacobian.is_some())
                .finish_non_exhaustive(),
        }
    }
}

/// A diffusion law together with its declared uniform lower bound `c0 > 0`
/// (`d_i(u) >= c0` on the nonnegative orthant; testable on sample boxes).
#[derive(Debug)]
pub struct DiffusionModel {
    law: DiffusionLaw,
    c0: f64,
}

impl DiffusionModel {
    pub fn new(law: DiffusionLaw, c0: f64) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(Error::Domain(String::from("c0 must be strictly positive")));
        }
        Ok(DiffusionModel { law, c0 })
    }

    pub fn law(&self) -> &DiffusionLaw {
        &self.law
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn eval_into(&self, u: &[f64], out: &mut [f64]) {
        match &self.law {
            DiffusionLaw::SktLinear { a0, a } => {
                for i in 0..a0.len() {
                    let mut acc = a0[i];
                    for j in 0..a0.len() {
                        acc += a.get(i, j) * u[j];
                    }
                    out[i] = acc;
                }
            }
            DiffusionLaw::Constant(d) => out.copy_from_slice(d),
            DiffusionLaw::Custom { eval, .. } => eval(u, out),
        }
    }

    /// `dd_i/du_j`, analytically when available.
    pub fn jacobian(&self, u: &[f64], n: usize) -> Option<SquareMatrix> {
        match &self.law {
            DiffusionLaw::SktLinear { a, .. } => Some(a.clone()),
            DiffusionLaw::Constant(_) => Some(SquareMatrix::zeros(n)),
            DiffusionLaw::Custom { jacobian, .. } => jacobian.as_ref().map(|jac| {
                let mut m = SquareMatrix::zeros(n);
                jac(u, &mut m);
                m
            }),
        }
    }

    pub fn has_jacobian(&self) -> bool {
        !matches!(&self.law, DiffusionLaw::Custom { jacobian: None, .. })
    }
}

/// Declared growth class of a reaction law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    Linear,
    Quadratic,
    Cubic,
    Custom,
}

type ReactionEval = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
type ReactionDiagDerivEval = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

pub enum ReactionLaw {
    /// `f = 0`.
    Zero,
    /// Lotka-Volterra competition (two species).
    LotkaVolterra(LotkaVolterra),
    /// `f_i = -u_i sum_j u_j`; totally mass dissipative, quadratic.
    MassDissipative,
    /// `f_i = u_i - u_i sum_j u_j`; linear growth, quasi-mass dissipative.
    LogisticDissipative,
    /// `f_i = -u_i (sum_j u_j)^2`; totally mass dissipative, cubic.
    CubicDissipative,
    /// User supplied; the diagonal derivative evaluator is optional.
    Custom { eval: ReactionEval, diag_derivative: Option<ReactionDiagDerivEval> },
}

impl fmt::Debug for ReactionLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ReactionLaw::Zero => "Zero",
            ReactionLaw::LotkaVolterra(_) => "LotkaVolterra",
            ReactionLaw::MassDissipative => "MassDissipative",
            ReactionLaw::LogisticDissipative => "LogisticDissipative",
            ReactionLaw::CubicDissipative => "CubicDissipative",
            ReactionLaw::Custom { .. } => "Custom",
        };
        f.write_str(name)
    }
}

/// A reaction law with its declared growth class.
#[derive(Debug)]
pub struct ReactionModel {
    law: ReactionLaw,
    growth: GrowthClass,
}

impl ReactionModel {
    pub fn new(law: ReactionLaw, growth: GrowthClass) -> Self {
        ReactionModel { law, growth }
    }

    pub fn zero() -> Self {
        ReactionModel::new(ReactionLaw::Zero, GrowthClass::Linear)
    }

    pub fn lotka_volterra(lv: LotkaVolterra) -> Self {
        ReactionModel::new(ReactionLaw::LotkaVolterra(lv), GrowthClass::Quadratic)
    }

    pub fn mass_dissipative() -> Self {
        ReactionModel::new(ReactionLaw::MassDissipative, GrowthClass::Quadratic)
    }

    pub fn logistic_dissipative() -> Self {
        ReactionModel::new(ReactionLaw::LogisticDissipative, GrowthClass::Linear)
    }

    pub fn cubic_dissipative() -> Self {
        ReactionModel::new(ReactionLaw::CubicDissipative, GrowthClass::Cubic)
    }

    pub fn law(&self) -> &ReactionLaw {
        &self.law
    }

    pub fn growth(&self) -> GrowthClass {
        self.growth
    }

    pub fn eval_into(&self, u: &[f64], out: &mut [f64]) {
        match &self.law {
            ReactionLaw::Zero => out.fill(0.0),
            ReactionLaw::LotkaVolterra(lv) => {
                let f = lv.eval(u);
                out.copy_from_slice(&f);
            }
            ReactionLaw::MassDissipative => {
                let s: f64 = u.iter().sum();
                for (o, &ui) in out.iter_mut().zip(u) {
                    *o = -ui * s;
                }
            }
            ReactionLaw::LogisticDissipative => {
                let s: f64 = u.iter().sum();
                for (o, &ui) in out.iter_mut().zip(u) {
                    *o = ui * (1.0 - s);
                }
            }
            ReactionLaw::CubicDissipative => {
                let s: f64 = u.iter().sum();
                for (o, &ui) in out.iter_mut().zip(u) {
                    *o = -ui * s * s;
                }
            }
            ReactionLaw::Custom { eval, .. } => eval(u, out),
        }
    }

    /// `df_i/du_i` when the law carries it.
    pub fn diag_derivative(&self, u: &[f64], out: &mut [f64]) -> bool {
        match &self.law {
            ReactionLaw::Zero => {
                out.fill(0.0);
                true
            }
            ReactionLaw::LotkaVolterra(lv) => {
                let d = lv.diag_derivative(u);
                out.copy_from_slice(&d);
                true
            }
            ReactionLaw::MassDissipative => {
                let s: f64 = u.iter().sum();
                for (o, &ui) in out.iter_mut().zip(u) {
                    *o = -s - ui;
                }
                true
            }
            ReactionLaw::LogisticDissipative => {
                let s: f64 = u.iter().sum();
                for (o, &ui) in out.iter_mut().zip(u) {
                    *o = 1.0 - s - ui;
                }
                true
            }
            ReactionLaw::CubicDissipative => {
                let s: f64 = u.iter().sum();
                for (o, &ui) in out.iter_mut().zip(u) {
                    *o = -s * s - 2.0 * ui * s;
                }
                true
            }
            ReactionLaw::Custom { diag_derivative, .. } => match diag_derivative {
                Some(dd) => {
                    dd(u, out);
                    true
                }
                None => false,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetTag {
    Skt,
    Semilinear,
    Custom,
}

/// Immutable bundle of species count, time constants, diffusion and reaction.
///
/// All matrix evaluators are pure functions of their inputs and safe to call
/// concurrently.
#[derive(Debug)]
pub struct ModelSpec {
    n: usize,
    tau: TauVector,
    diffusion: DiffusionModel,
    reaction: ReactionModel,
    preset: PresetTag,
    skt: Option<SKTCoefficients>,
}

impl ModelSpec {
    /// SKT preset: linear diffusion law from the coefficient tables.
    pub fn skt(coeffs: SKTCoefficients, tau: TauVector, reaction: ReactionModel) -> Result<Self> {
        let n = coeffs.species();
        if tau.len() != n {
            return Err(Error::InvalidInput(String::from("tau length must equal species count")));
        }
        let c0 = coeffs.a0().iter().copied().fold(f64::INFINITY, f64::min);
        let diffusion = DiffusionModel::new(
            DiffusionLaw::SktLinear { a0: coeffs.a0().to_vec(), a: coeffs.a().clone() },
            c0,
        )?;
        Ok(ModelSpec { n, tau, diffusion, reaction, preset: PresetTag::Skt, skt: Some(coeffs) })
    }

    /// Semilinear preset: constant diffusion `d_i(u) = d_i`. Carries the
    /// degenerate SKT tables (`a = 0`) so closed-form coefficient checks
    /// remain available.
    pub fn semilinear(d: Vec<f64>, tau: TauVector, reaction: ReactionModel) -> Result<Self> {
        let n = d.len();
        if tau.len() != n {
            return Err(Error::InvalidInput(String::from("tau length must equal species count")));
        }
        let coeffs = SKTCoefficients::new(d.clone(), SquareMatrix::zeros(n), None)?;
        let c0 = d.iter().copied().fold(f64::INFINITY, f64::min);
        let diffusion = DiffusionModel::new(DiffusionLaw::Constant(d), c0)?;
        Ok(ModelSpec {
            n,
            tau,
            diffusion,
            reaction,
            preset: PresetTag::Semilinear,
            skt: Some(coeffs),
        })
    }

    pub fn custom(
        n: usize,
        tau: TauVector,
        diffusion: DiffusionModel,
        reaction: ReactionModel,
    ) -> Result<Self> {
        if tau.len() != n {
            return Err(Error::InvalidInput(String::from("tau length must equal species count")));
        }
        Ok(ModelSpec { n, tau, diffusion, reaction, preset: PresetTag::Custom, skt: None })
    }

    pub fn species(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> &TauVector {
        &self.tau
    }

    pub fn diffusion(&self) -> &DiffusionModel {
        &self.diffusion
    }

    pub fn reaction(&self) -> &ReactionModel {
        &self.reaction
    }

    pub fn preset(&self) -> PresetTag {
        self.preset
    }

    pub fn skt_coefficients(&self) -> Option<&SKTCoefficients> {
        self.skt.as_ref()
    }

    fn check_state(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n {
            return Err(Error::InvalidInput(String::from("state length must equal species count")));
        }
        if u.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::Domain(String::from("state components must be nonnegative and finite")));
        }
        Ok(())
    }

    /// Diffusion coefficients `d(u)` at a nonnegative state.
    pub fn eval_d(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_state(u)?;
        let mut out = vec![0.0; self.n];
        self.diffusion.eval_into(u, &mut out);
        Ok(out)
    }

    /// Reaction terms `f(u)` at a nonnegative state.
    pub fn eval_f(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_state(u)?;
        let mut out = vec![0.0; self.n];
        self.reaction.eval_into(u, &mut out);
        Ok(out)
    }

    /// Diffusion Jacobian `A_ij(u) = (dd_i/du_j) u_i + delta_ij d_i(u)`.
    pub fn diffusion_jacobian(&self, u: &[f64]) -> Result<SquareMatrix> {
        self.check_state(u)?;
        let jac = self.diffusion.jacobian(u, self.n).ok_or_else(|| {
            Error::Capability(String::from(
                "diffusion law carries no derivative evaluator; supply an analytic Jacobian",
            ))
        })?;
        let mut d = vec![0.0; self.n];
        self.diffusion.eval_into(u, &mut d);
        Ok(assemble_diffusion_jacobian(&jac, &d, u))
    }

    /// Weighted matrix `A^alpha_ij(u) = A_ij(u) (u_i/u_j)^alpha`; requires a
    /// strictly positive state.
    pub fn weighted_matrix(&self, u: &[f64], alpha: f64) -> Result<SquareMatrix> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(String::from("alpha must be strictly positive")));
        }
        if let Some(k) = u.iter().position(|&v| v <= 0.0) {
            return Err(Error::SingularWeight { species: k });
        }
        let a = self.diffusion_jacobian(u)?;
        Ok(weight_entries(&a, u, alpha))
    }

    /// Mobility matrix `P(u)`; symmetric by construction.
    pub fn mobility_matrix(&self, u: &[f64]) -> Result<SquareMatrix> {
        self.check_state(u)?;
        let jac = self.diffusion.jacobian(u, self.n).ok_or_else(|| {
            Error::Capability(String::from(
                "diffusion law carries no derivative evaluator; supply an analytic Jacobian",
            ))
        })?;
        let mut d = vec![0.0; self.n];
        self.diffusion.eval_into(u, &mut d);
        Ok(assemble_mobility(&jac, &d, u))
    }

    /// Onsager matrix `B = A(u) H^{-1}(u)` with `H = diag(1/u_i)`, i.e.
    /// `B_ij = A_ij(u) u_j`; requires a strictly positive state.
    pub fn onsager_matrix(&self, u: &[f64]) -> Result<SquareMatrix> {
        if let Some(k) = u.iter().position(|&v| v <= 0.0) {
            return Err(Error::SingularWeight { species: k });
        }
        let a = self.diffusion_jacobian(u)?;
        Ok(SquareMatrix::from_fn(self.n, |i, j| a.get(i, j) * u[j]))
    }

    /// Deterministic fingerprint of the model parameters, recorded in run
    /// metadata so monitor series can be tied back to the generating model.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        h.write_u64(self.n as u64);
        for &t in self.tau.as_slice() {
            h.write_f64(t);
        }
        match self.diffusion.law() {
            DiffusionLaw::SktLinear { a0, a } => {
                h.write_u64(1);
                for &v in a0 {
                    h.write_f64(v);
                }
                for &v in a.data() {
                    h.write_f64(v);
                }
            }
            DiffusionLaw::Constant(d) => {
                h.write_u64(2);
                for &v in d {
                    h.write_f64(v);
                }
            }
            DiffusionLaw::Custom { .. } => h.write_u64(3),
        }
        match self.reaction.law() {
            ReactionLaw::Zero => h.write_u64(10),
            ReactionLaw::LotkaVolterra(lv) => {
                h.write_u64(11);
                for &v in lv.a.iter().chain(&lv.b).chain(&lv.c) {
                    h.write_f64(v);
                }
            }
            ReactionLaw::MassDissipative => h.write_u64(12),
            ReactionLaw::LogisticDissipative => h.write_u64(13),
            ReactionLaw::CubicDissipative => h.write_u64(14),
            ReactionLaw::Custom { .. } => h.write_u64(15),
        }
        h.finish()
    }
}

/// `A_ij = jac_ij u_i + delta_ij d_i` from precomputed derivatives `jac` and
/// coefficients `d`; shared with the sampling fallback in `conditions`.
pub(crate) fn assemble_diffusion_jacobian(
    jac: &SquareMatrix,
    d: &[f64],
    u: &[f64],
) -> SquareMatrix {
    SquareMatrix::from_fn(d.len(), |i, j| {
        let mut v = jac.get(i, j) * u[i];
        if i == j {
            v += d[i];
        }
        v
    })
}

/// `p_ij = (jac_ij + jac_ji) u_i u_j + 2 delta_ij d_i u_i`; symmetric by
/// construction.
pub(crate) fn assemble_mobility(jac: &SquareMatrix, d: &[f64], u: &[f64]) -> SquareMatrix {
    let n = d.len();
    let mut p = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut v = (jac.get(i, j) + jac.get(j, i)) * u[i] * u[j];
            if i == j {
                v += 2.0 * d[i] * u[i];
            }
            p.set(i, j, v);
            p.set(j, i, v);
        }
    }
    p
}

/// Entrywise weighting `M_ij (u_i/u_j)^alpha`.
pub(crate) fn weight_entries(m: &SquareMatrix, u: &[f64], alpha: f64) -> SquareMatrix {
    SquareMatrix::from_fn(m.n(), |i, j| {
        if i == j {
            m.get(i, j)
        } else {
            m.get(i, j) * (u[i] / u[j]).powf(alpha)
        }
    })
}

/// FNV-1a for deterministic parameter fingerprints.
struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn write_f64(&mut self, v: f64) {
        self.write_u64(v.to_bits());
    }

    fn finish(&self) -> u64 {
        self.0
    }
}
