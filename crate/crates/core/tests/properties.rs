//! Property tests for the structural invariants of the model and condition
//! layers.

use proptest::prelude::*;

use sktlab_core::conditions::{
    check_a_alpha, check_detailed_balance, check_p_psd, skt_condition_23r, skt_condition_25r,
    SampleBox,
};
use sktlab_core::linalg::SquareMatrix;
use sktlab_core::model::{ModelSpec, ReactionModel, SKTCoefficients, TauVector};
use sktlab_core::solver::{discrete_flux_divergence, Grid, StateField};

fn skt_model(a0: [f64; 2], a: [[f64; 2]; 2]) -> ModelSpec {
    let coeffs = SKTCoefficients::two_species(a0, a, None).unwrap();
    ModelSpec::skt(coeffs, TauVector::ones(2), ReactionModel::zero()).unwrap()
}

fn coeff() -> impl Strategy<Value = f64> {
    // Mix a point mass at zero with a continuous part, like the closed-form
    // conditions require.
    prop_oneof![2 => Just(0.0), 5 => 0.0..5.0f64]
}

proptest! {
    #[test]
    fn mobility_matrix_symmetry(
        a11 in coeff(), a12 in coeff(), a21 in coeff(), a22 in coeff(),
        a01 in 0.1..2.0f64, a02 in 0.1..2.0f64,
        u1 in 0.0..10.0f64, u2 in 0.0..10.0f64,
    ) {
        let m = skt_model([a01, a02], [[a11, a12], [a21, a22]]);
        let p = m.mobility_matrix(&[u1, u2]).unwrap();
        prop_assert_eq!(p.get(0, 1).to_bits(), p.get(1, 0).to_bits());
    }

    #[test]
    fn onsager_is_jacobian_times_diagonal_state(
        a11 in coeff(), a12 in coeff(), a21 in coeff(), a22 in coeff(),
        u1 in 0.01..10.0f64, u2 in 0.01..10.0f64,
    ) {
        let m = skt_model([1.0, 1.0], [[a11, a12], [a21, a22]]);
        let u = [u1, u2];
        let a = m.diffusion_jacobian(&u).unwrap();
        let b = m.onsager_matrix(&u).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert_eq!(b.get(i, j), a.get(i, j) * u[j]);
            }
        }
    }

    #[test]
    fn weighted_matrix_reduces_to_jacobian_on_equal_states(
        a11 in coeff(), a12 in coeff(), a21 in coeff(), a22 in coeff(),
        u in 0.01..10.0f64,
        alpha in 0.1..6.0f64,
    ) {
        let m = skt_model([1.0, 1.0], [[a11, a12], [a21, a22]]);
        let state = [u, u];
        let a = m.diffusion_jacobian(&state).unwrap();
        let w = m.weighted_matrix(&state, alpha).unwrap();
        prop_assert_eq!(a, w);
    }

    #[test]
    fn detailed_balance_weights_satisfy_the_identity(
        s12 in 0.1..5.0f64, s13 in 0.1..5.0f64, s23 in 0.1..5.0f64,
        p1 in 0.1..4.0f64, p2 in 0.1..4.0f64, p3 in 0.1..4.0f64,
    ) {
        // Build a_ij = r_ij / pi_i from a symmetric positive r: detailed
        // balance holds by construction and the checker must certify it.
        let pi = [p1, p2, p3];
        let r = [[0.0, s12, s13], [s12, 0.0, s23], [s13, s23, 0.0]];
        let a = SquareMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { r[i][j] / pi[i] });
        let c = SKTCoefficients::new(vec![1.0, 1.0, 1.0], a.clone(), None).unwrap();
        let verdict = check_detailed_balance(&c);
        prop_assert!(verdict.holds(), "{:?}", verdict);
        let weights = verdict.constants.unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j { continue; }
                let lhs = weights[i] * a.get(i, j);
                let rhs = weights[j] * a.get(j, i);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()));
            }
        }
    }

    #[test]
    fn condition_25r_certifies_weighted_coercivity(
        a11 in coeff(), a22 in coeff(),
        a01 in 0.1..2.0f64, a02 in 0.1..2.0f64,
        seed in 0u64..1000,
    ) {
        // The true half of closed-form/sampler agreement: no cross terms
        // implies A_alpha + A_alpha^t >= 2 min a_i0 > min a_i0 = delta.
        let coeffs = SKTCoefficients::two_species([a01, a02], [[a11, 0.0], [0.0, a22]], None).unwrap();
        prop_assert!(skt_condition_25r(&coeffs).unwrap());
        let m = ModelSpec::skt(coeffs, TauVector::ones(2), ReactionModel::zero()).unwrap();
        let sbox = SampleBox::cube(2, 0.01, 10.0, 64, seed).unwrap();
        let delta = a01.min(a02);
        let verdict = check_a_alpha(&m, &sbox, &[0.5, 1.0, 2.0, 5.0], delta).unwrap();
        prop_assert!(verdict.holds(), "{:?}", verdict);
        prop_assert!(verdict.constant.unwrap() >= 2.0 * delta - 1e-9);
    }

    #[test]
    fn diagonal_cross_free_tables_pass_23r_and_psd(
        a11 in 0.0..5.0f64,
        a01 in 0.1..2.0f64, a02 in 0.1..2.0f64,
        seed in 0u64..1000,
    ) {
        // A sound slice of (23r): with a12 = a21 = a22 = 0 and a11 a22 = 0
        // the closed form is true and P = diag(2 u1 (a10 + 2 a11 u1), 2 a20 u2)
        // really is PSD; the sampler must agree on any box.
        let coeffs = SKTCoefficients::two_species([a01, a02], [[a11, 0.0], [0.0, 0.0]], None).unwrap();
        prop_assert!(skt_condition_23r(&coeffs).unwrap());
        let m = ModelSpec::skt(coeffs, TauVector::ones(2), ReactionModel::zero()).unwrap();
        let sbox = SampleBox::cube(2, 0.0, 10.0, 64, seed).unwrap();
        let verdict = check_p_psd(&m, &sbox).unwrap();
        prop_assert!(verdict.holds(), "{:?}", verdict);
    }

    #[test]
    fn flux_divergence_cell_sum_vanishes(
        cells in 2usize..64,
        amp in 0.1..4.0f64,
        phase in 0usize..7,
    ) {
        let m = skt_model([1.0, 1.0], [[1.0, 2.0], [0.5, 1.5]]);
        let g = Grid::one_dim(cells, 1.0).unwrap();
        let s = StateField::from_fn(&g, 2, |sp, ix, _| {
            1.0 + amp * (((ix + phase) * (sp + 3)) % 11) as f64 / 11.0
        });
        for i in 0..2 {
            let lap = discrete_flux_divergence(&m, &g, &s, i).unwrap();
            let total: f64 = lap.iter().sum();
            let wmax = 1.0 + 5.0 * amp;
            prop_assert!(total.abs() <= 1e-13 * wmax * cells as f64 / (g.hx() * g.hx()));
        }
    }
}
