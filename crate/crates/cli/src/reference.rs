//! Independent reference solutions used by the verification suites: a
//! classical fourth-order Runge-Kutta integrator for spatially constant
//! dynamics and the exact cosine-mode solution of the constant-coefficient
//! heat preset. These never touch the finite-volume code paths they check.

use std::f64::consts::PI;

/// Classical RK4 for `tau_i y_i' = f_i(y)` from `t0` to `t1` in `steps`
/// equal steps.
pub fn rk4(
    f: &dyn Fn(&[f64], &mut [f64]),
    tau: &[f64],
    y0: &[f64],
    t0: f64,
    t1: f64,
    steps: usize,
) -> Vec<f64> {
    let n = y0.len();
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let rate = |f_out: &mut [f64], tau: &[f64]| {
        for i in 0..f_out.len() {
            f_out[i] /= tau[i];
        }
    };
    for _ in 0..steps {
        f(&y, &mut k1);
        rate(&mut k1, tau);
        for i in 0..n {
            stage[i] = y[i] + 0.5 * h * k1[i];
        }
        f(&stage, &mut k2);
        rate(&mut k2, tau);
        for i in 0..n {
            stage[i] = y[i] + 0.5 * h * k2[i];
        }
        f(&stage, &mut k3);
        rate(&mut k3, tau);
        for i in 0..n {
            stage[i] = y[i] + h * k3[i];
        }
        f(&stage, &mut k4);
        rate(&mut k4, tau);
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// Exact solution of `tau u_t = d u_xx` with Neumann boundary on `[0, L]`
/// and initial value `base + amp cos(pi x / L)`.
pub fn heat_exact(x: f64, t: f64, d: f64, tau: f64, length: f64, base: f64, amp: f64) -> f64 {
    base + amp * (PI * x / length).cos() * (-d * PI * PI * t / (tau * length * length)).exp()
}
