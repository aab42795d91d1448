//! Built-in verification suites: oracle agreement, convergence orders,
//! conservation and closed-form/sampler consistency. The report is fully
//! deterministic (fixed seeds, no timing), so repeated invocations produce
//! byte-identical output.

use std::f64::consts::PI;
use std::fmt::Write as _;

use sktlab_core::conditions::{
    check_a_alpha, check_diffusion_bounds, radical_inverse, skt_condition_25r, skt_condition_26r,
    DiffusionBoundForm, SampleBox,
};
use sktlab_core::model::{LotkaVolterra, ModelSpec, ReactionModel, SKTCoefficients, TauVector};
use sktlab_core::solver::{
    discrete_flux_divergence, run, Grid, Scheme, SolverConfig, StateField,
};

use crate::reference::{heat_exact, rk4};

pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    pub metrics: Vec<(String, String)>,
}

fn metric(name: &str, value: f64) -> (String, String) {
    (name.to_string(), format!("{value:.6e}"))
}

fn skt_two(a0: [f64; 2], a: [[f64; 2]; 2], reaction: ReactionModel) -> ModelSpec {
    let coeffs = SKTCoefficients::two_species(a0, a, None).unwrap();
    ModelSpec::skt(coeffs, TauVector::ones(2), reaction).unwrap()
}

/// Generic matrix evaluators against the independently coded closed forms of
/// the two-species linear diffusion law.
fn suite_sktp_consistency() -> SuiteResult {
    let (a0, a) = ([1.4, 0.6], [[0.3, 2.1], [1.7, 0.9]]);
    let m = skt_two(a0, a, ReactionModel::zero());
    let mut worst_a = 0.0f64;
    let mut worst_p = 0.0f64;
    for k in 1..=1000u64 {
        let u = [10.0 * radical_inverse(k, 2), 10.0 * radical_inverse(k, 3)];
        let jac = m.diffusion_jacobian(&u).unwrap();
        let closed_a = [
            [a0[0] + 2.0 * a[0][0] * u[0] + a[0][1] * u[1], a[0][1] * u[0]],
            [a[1][0] * u[1], a0[1] + a[1][0] * u[0] + 2.0 * a[1][1] * u[1]],
        ];
        for i in 0..2 {
            for j in 0..2 {
                let rel = (jac.get(i, j) - closed_a[i][j]).abs() / (1.0 + closed_a[i][j].abs());
                worst_a = worst_a.max(rel);
            }
        }
        let p = m.mobility_matrix(&u).unwrap();
        let closed_p = [
            [
                2.0 * a0[0] * u[0] + 2.0 * (2.0 * a[0][0] * u[0] * u[0] + a[0][1] * u[0] * u[1]),
                (a[0][1] + a[1][0]) * u[0] * u[1],
            ],
            [
                (a[0][1] + a[1][0]) * u[0] * u[1],
                2.0 * a0[1] * u[1] + 2.0 * (a[1][0] * u[0] * u[1] + 2.0 * a[1][1] * u[1] * u[1]),
            ],
        ];
        for i in 0..2 {
            for j in 0..2 {
                let rel = (p.get(i, j) - closed_p[i][j]).abs() / (1.0 + closed_p[i][j].abs());
                worst_p = worst_p.max(rel);
            }
        }
    }
    SuiteResult {
        name: "sktp-consistency",
        pass: worst_a <= 1e-12 && worst_p <= 1e-12,
        metrics: vec![
            metric("max_rel_error_diffusion_jacobian", worst_a),
            metric("max_rel_error_mobility", worst_p),
        ],
    }
}

fn heat_error(cells: usize, dt: f64, t_end: f64) -> f64 {
    let m = ModelSpec::semilinear(vec![1.0], TauVector::ones(1), ReactionModel::zero()).unwrap();
    let grid = Grid::one_dim(cells, 1.0).unwrap();
    let u0 = StateField::from_fn(&grid, 1, |_, ix, _| {
        let (x, _) = grid.cell_center(ix, 0);
        1.0 + 0.1 * (PI * x).cos()
    });
    let mut cfg = SolverConfig::new(Scheme::SemiImplicit, dt, t_end);
    cfg.monitor_every = usize::MAX >> 1;
    let result = run(&m, &grid, &u0, &cfg).unwrap();
    let last = result.snapshots.last().unwrap();
    let mut err = 0.0f64;
    for ix in 0..cells {
        let (x, _) = grid.cell_center(ix, 0);
        err = err.max((last.get(0, ix) - heat_exact(x, t_end, 1.0, 1.0, 1.0, 1.0, 0.1)).abs());
    }
    err
}

/// Semi-implicit scheme against the exact cosine-mode decay: second order in
/// space, first order in time.
fn suite_heat_convergence() -> SuiteResult {
    let (es1, es2) = (heat_error(16, 2e-5, 0.1), heat_error(32, 2e-5, 0.1));
    let spatial_order = (es1 / es2).log2();
    let (et1, et2) = (heat_error(256, 4e-3, 0.1), heat_error(256, 2e-3, 0.1));
    let temporal_order = (et1 / et2).log2();
    SuiteResult {
        name: "heat-convergence",
        pass: (spatial_order - 2.0).abs() <= 0.3 && (temporal_order - 1.0).abs() <= 0.3,
        metrics: vec![
            metric("spatial_order", spatial_order),
            metric("temporal_order", temporal_order),
        ],
    }
}

/// Spatially constant Lotka-Volterra runs against the RK4 reference at
/// one-hundredth of the step.
fn suite_ode_oracle() -> SuiteResult {
    let lv = LotkaVolterra { a: [2.0, 2.0], b: [1.0, 3.0], c: [3.0, 1.0] };
    let coeffs = SKTCoefficients::two_species([1.0, 1.0], [[1.0, 1.0], [1.0, 1.0]], Some(lv)).unwrap();
    let m = ModelSpec::skt(coeffs, TauVector::ones(2), ReactionModel::lotka_volterra(lv)).unwrap();
    let u0 = [0.5, 0.7];
    let dt = 2e-5;
    let t_end = 1.0;
    let f = move |y: &[f64], out: &mut [f64]| {
        let v = lv.eval(y);
        out.copy_from_slice(&v);
    };
    let reference = rk4(&f, &[1.0, 1.0], &u0, 0.0, t_end, (t_end / (dt / 100.0)) as usize);
    let mut worst = 0.0f64;
    for cells in [1usize, 64] {
        let grid = Grid::one_dim(cells, 1.0).unwrap();
        let field = StateField::constant(&grid, &u0);
        let mut cfg = SolverConfig::new(Scheme::Explicit, dt, t_end);
        cfg.monitor_every = usize::MAX >> 1;
        let result = run(&m, &grid, &field, &cfg).unwrap();
        let last = result.snapshots.last().unwrap();
        for s in 0..2 {
            for c in 0..cells {
                let rel = (last.get(s, c) - reference[s]).abs() / reference[s].abs();
                worst = worst.max(rel);
            }
        }
    }
    SuiteResult {
        name: "ode-oracle",
        pass: worst <= 1e-4,
        metrics: vec![metric("max_rel_error_vs_rk4", worst)],
    }
}

/// Exact discrete conservation: mass constant without reaction, and
/// roundoff-level cell sums of the flux divergence.
fn suite_conservation() -> SuiteResult {
    let m = skt_two([1.0, 1.0], [[1.0, 2.0], [0.5, 1.0]], ReactionModel::zero());
    let grid = Grid::one_dim(64, 1.0).unwrap();
    let u0 = StateField::from_fn(&grid, 2, |s, ix, _| {
        1.0 + 0.4 * radical_inverse(ix as u64 + 1 + 64 * s as u64, 2)
    });
    let mut cfg = SolverConfig::new(Scheme::SemiImplicit, 1e-3, 1.0);
    cfg.monitor_every = usize::MAX >> 1;
    let result = run(&m, &grid, &u0, &cfg).unwrap();
    let drift = {
        let first = result.monitors.mass.samples.first().unwrap().1;
        let last = result.monitors.mass.samples.last().unwrap().1;
        (last - first).abs() / first
    };
    let mut worst_sum = 0.0f64;
    for i in 0..2 {
        let lap = discrete_flux_divergence(&m, &grid, &u0, i).unwrap();
        let scale = 1.0 + u0.max_abs() * 10.0;
        let total: f64 = lap.iter().sum();
        worst_sum = worst_sum.max(total.abs() / (scale * grid.cells() as f64 / (grid.hx() * grid.hx())));
    }
    SuiteResult {
        name: "conservation",
        pass: drift <= 1e-12 && worst_sum <= 1e-13,
        metrics: vec![
            metric("mass_relative_drift", drift),
            metric("normalized_flux_cell_sum", worst_sum),
        ],
    }
}

/// Sound closed-form directions against the samplers: vanishing cross
/// coefficients certify weighted coercivity with delta = min a_i0, and the
/// determinant condition certifies the quadratic diffusion bound.
fn suite_closed_form_vs_sampler() -> SuiteResult {
    let mut checked = 0u64;
    let mut agreed = 0u64;
    for k in 1..=200u64 {
        let a11 = 5.0 * radical_inverse(k, 2);
        let a22 = 5.0 * radical_inverse(k, 3);
        let a01 = 0.1 + 1.9 * radical_inverse(k, 5);
        let a02 = 0.1 + 1.9 * radical_inverse(k, 7);
        let coeffs =
            SKTCoefficients::two_species([a01, a02], [[a11, 0.0], [0.0, a22]], None).unwrap();
        if !skt_condition_25r(&coeffs).unwrap() {
            continue;
        }
        let m = ModelSpec::skt(coeffs, TauVector::ones(2), ReactionModel::zero()).unwrap();
        let sbox = SampleBox::cube(2, 0.01, 10.0, 96, k).unwrap();
        let delta = a01.min(a02);
        checked += 1;
        if check_a_alpha(&m, &sbox, &[0.5, 1.0, 2.0, 5.0], delta).unwrap().holds() {
            agreed += 1;
        }
    }
    let mut checked_26 = 0u64;
    let mut agreed_26 = 0u64;
    for k in 1..=200u64 {
        let a11 = 0.2 + 4.8 * radical_inverse(k, 2);
        let a22 = 0.2 + 4.8 * radical_inverse(k, 3);
        // Stay inside (26r): a12 + a21 <= 2 sqrt(a11 a22).
        let budget = 2.0 * (a11 * a22).sqrt();
        let a12 = budget * radical_inverse(k, 5) * 0.99;
        let a21 = (budget - a12) * radical_inverse(k, 7) * 0.99;
        let coeffs =
            SKTCoefficients::two_species([1.0, 1.0], [[a11, a12], [a21, a22]], None).unwrap();
        if !skt_condition_26r(&coeffs).unwrap() {
            continue;
        }
        let m = ModelSpec::skt(coeffs, TauVector::ones(2), ReactionModel::zero()).unwrap();
        let sbox = SampleBox::cube(2, 0.0, 10.0, 96, k).unwrap();
        checked_26 += 1;
        let verdict = check_diffusion_bounds(&m, &sbox, DiffusionBoundForm::Quadratic).unwrap();
        if verdict.holds() && verdict.constant.unwrap_or(0.0) > 0.0 {
            agreed_26 += 1;
        }
    }
    SuiteResult {
        name: "closed-form-vs-sampler",
        pass: checked > 0 && checked == agreed && checked_26 > 0 && checked_26 == agreed_26,
        metrics: vec![
            metric("cases_25r", checked as f64),
            metric("agreed_25r", agreed as f64),
            metric("cases_26r", checked_26 as f64),
            metric("agreed_26r", agreed_26 as f64),
        ],
    }
}

/// Entropy monotonicity of the zero-reaction run on a diagonal preset; the
/// f = 0 case of the entropy inequality.
fn suite_entropy_decay() -> SuiteResult {
    let m = skt_two([1.0, 1.0], [[1.0, 0.0], [0.0, 1.0]], ReactionModel::zero());
    let grid = Grid::one_dim(48, 1.0).unwrap();
    let u0 = StateField::from_fn(&grid, 2, |s, ix, _| {
        let (x, _) = grid.cell_center(ix, 0);
        1.0 + 0.3 * ((s as f64 + 1.0) * PI * x).cos()
    });
    let cfg = SolverConfig::new(Scheme::SemiImplicit, 1e-3, 1.0);
    let result = run(&m, &grid, &u0, &cfg).unwrap();
    let entropy = &result.monitors.entropy.samples;
    let worst_rise = entropy
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let dissipation_min = result
        .monitors
        .dissipation
        .samples
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    SuiteResult {
        name: "entropy-decay",
        pass: worst_rise <= 1e-10 && dissipation_min >= -1e-10,
        metrics: vec![
            metric("max_entropy_increase_per_step", worst_rise),
            metric("min_dissipation", dissipation_min),
        ],
    }
}

pub fn run_all() -> (String, bool) {
    let suites = [
        suite_sktp_consistency(),
        suite_heat_convergence(),
        suite_ode_oracle(),
        suite_conservation(),
        suite_closed_form_vs_sampler(),
        suite_entropy_decay(),
    ];
    let mut all_pass = true;
    let mut out = String::from("sktlab verification suites\n==========================\n");
    for suite in &suites {
        all_pass &= suite.pass;
        let dots = ".".repeat(28usize.saturating_sub(suite.name.len()));
        let _ = writeln!(out, "{} {} {}", suite.name, dots, if suite.pass { "PASS" } else { "FAIL" });
        for (k, v) in &suite.metrics {
            let _ = writeln!(out, "    {k} = {v}");
        }
    }
    let _ = writeln!(out, "\noverall: {}", if all_pass { "PASS" } else { "FAIL" });
    (out, all_pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verify_report_is_deterministic() {
        let (r1, ok1) = run_all();
        let (r2, ok2) = run_all();
        assert_eq!(r1, r2);
        assert_eq!(ok1, ok2);
    }
}
