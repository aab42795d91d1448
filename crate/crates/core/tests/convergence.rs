//! Refinement studies of the semi-implicit scheme against the exact
//! cosine-mode solution of the constant-coefficient heat preset:
//! `u(x, t) = 1 + 0.1 cos(pi x / L) exp(-d pi^2 t / (tau L^2))`.

use std::f64::consts::PI;

use sktlab_core::model::{ModelSpec, ReactionModel, TauVector};
use sktlab_core::solver::{run, Grid, Scheme, SolverConfig, StateField};

fn heat_model(d: f64) -> ModelSpec {
    ModelSpec::semilinear(vec![d], TauVector::ones(1), ReactionModel::zero()).unwrap()
}

fn cosine_ic(grid: &Grid, base: f64, amp: f64) -> StateField {
    StateField::from_fn(grid, 1, |_, ix, _| {
        let (x, _) = grid.cell_center(ix, 0);
        base + amp * (PI * x / grid.lx()).cos()
    })
}

fn heat_error(cells: usize, dt: f64, t_end: f64, d: f64) -> f64 {
    let grid = Grid::one_dim(cells, 1.0).unwrap();
    let u0 = cosine_ic(&grid, 1.0, 0.1);
    let mut cfg = SolverConfig::new(Scheme::SemiImplicit, dt, t_end);
    cfg.monitor_every = usize::MAX >> 1;
    let result = run(&heat_model(d), &grid, &u0, &cfg).unwrap();
    let final_state = result.snapshots.last().unwrap();
    let decay = (-d * PI * PI * t_end).exp();
    let mut err = 0.0f64;
    for ix in 0..cells {
        let (x, _) = grid.cell_center(ix, 0);
        let exact = 1.0 + 0.1 * (PI * x).cos() * decay;
        err = err.max((final_state.get(0, ix) - exact).abs());
    }
    err
}

#[test]
fn heat_spatial_order_is_two() {
    // dt small enough that the temporal error is negligible.
    let e1 = heat_error(16, 2e-5, 0.1, 1.0);
    let e2 = heat_error(32, 2e-5, 0.1, 1.0);
    let order = (e1 / e2).log2();
    assert!(
        (order - 2.0).abs() <= 0.3,
        "spatial order {order} (errors {e1:.3e} -> {e2:.3e})"
    );
}

#[test]
fn heat_temporal_order_is_one() {
    // Fine grid so the spatial error is negligible.
    let e1 = heat_error(256, 4e-3, 0.1, 1.0);
    let e2 = heat_error(256, 2e-3, 0.1, 1.0);
    let order = (e1 / e2).log2();
    assert!(
        (order - 1.0).abs() <= 0.3,
        "temporal order {order} (errors {e1:.3e} -> {e2:.3e})"
    );
}

#[test]
fn heat_recovers_exact_decay_rate() {
    let d = 1.0;
    let t_end = 0.2;
    let grid = Grid::one_dim(128, 1.0).unwrap();
    let u0 = cosine_ic(&grid, 1.0, 0.1);
    let cfg = SolverConfig::new(Scheme::SemiImplicit, 1e-4, t_end);
    let result = run(&heat_model(d), &grid, &u0, &cfg).unwrap();
    let last = result.snapshots.last().unwrap();
    let amp = (0..128)
        .map(|ix| last.get(0, ix))
        .fold(f64::NEG_INFINITY, f64::max)
        - 1.0;
    let rate = -(amp / 0.1).ln() / t_end;
    let exact = d * PI * PI;
    assert!(
        (rate - exact).abs() <= 0.02 * exact,
        "decay rate {rate} vs {exact}"
    );
}

#[test]
fn two_dim_heat_matches_product_cosine_mode() {
    // u = 1 + 0.1 cos(pi x / Lx) cos(pi y / Ly) decays at the summed mode
    // rates; mirrors of both axes keep the product mode exact in space.
    let d = 1.0;
    let t_end = 0.05;
    let grid = Grid::two_dim(24, 16, 1.0, 2.0).unwrap();
    let u0 = StateField::from_fn(&grid, 1, |_, ix, iy| {
        let (x, y) = grid.cell_center(ix, iy);
        1.0 + 0.1 * (PI * x / grid.lx()).cos() * (PI * y / grid.ly()).cos()
    });
    let m = heat_model(d);
    let cfg = SolverConfig::new(Scheme::SemiImplicit, 2e-4, t_end);
    let result = run(&m, &grid, &u0, &cfg).unwrap();
    let last = result.snapshots.last().unwrap();
    let rate = d * PI * PI * (1.0 / (grid.lx() * grid.lx()) + 1.0 / (grid.ly() * grid.ly()));
    let decay = (-rate * t_end).exp();
    let mut err = 0.0f64;
    for iy in 0..grid.ny() {
        for ix in 0..grid.nx() {
            let (x, y) = grid.cell_center(ix, iy);
            let exact =
                1.0 + 0.1 * (PI * x / grid.lx()).cos() * (PI * y / grid.ly()).cos() * decay;
            err = err.max((last.get(0, iy * grid.nx() + ix) - exact).abs());
        }
    }
    assert!(err < 5e-4, "2D heat error {err}");
    // Mass conserved across the run.
    let mass = &result.monitors.mass.samples;
    let drift = (mass.last().unwrap().1 - mass[0].1).abs() / mass[0].1;
    assert!(drift <= 1e-12, "2D mass drift {drift}");
}
