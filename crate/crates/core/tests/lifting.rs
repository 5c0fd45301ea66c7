mod common;

use fisher_stab::gains::{gain_vector, FeedbackLaw};
use fisher_stab::lifting::{
    closed_loop_modal_matrix, lyapunov_certificate, modal_identity_refinement, observed_orders, reduced_matrix,
    reduced_ode_integrate, solve_lift, symmetric_norm, v_transform, weighted_norm,
};
use fisher_stab::spectral::{Grid, StateField, Window};
use fisher_stab::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

const MS: [usize; 3] = [100, 200, 400];

/// `exp(M t)` for a 2×2 matrix with distinct real eigenvalues (Sylvester).
fn expm_2x2(m: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let tr = m.trace();
    let det = m.determinant();
    let disc = (tr * tr / 4.0 - det).sqrt();
    let (mu1, mu2) = (tr / 2.0 + disc, tr / 2.0 - disc);
    let id = DMatrix::identity(2, 2);
    ((m - &id * mu2) * (mu1 * t).exp() - (m - &id * mu1) * (mu2 * t).exp()) / (mu1 - mu2)
}

#[test]
fn reference_closed_loop_has_shift_eigenvalues() {
    let (_, gs) = common::reference();
    let a = closed_loop_modal_matrix(&gs, &gain_vector(&gs));
    // characteristic polynomial μ² − tr μ + det must be (μ + 15)(μ + 20)
    assert!((a.trace() + 35.0).abs() <= 1e-9);
    assert!((a.determinant() - 300.0).abs() <= 1e-8);
    let rs = reduced_matrix(&gs);
    assert!((&rs.m_matrix - &a).amax() <= 1e-10 * a.amax());
}

#[test]
fn lyapunov_certificate_on_random_configs() {
    let mut rng = common::rng(218);
    let mut refused = 0;
    for _ in 0..100 {
        let (_, gs, r) = common::random_gains(&mut rng, 4);
        refused += r;
        let rs = reduced_matrix(&gs);
        let bound = 1e-8 * symmetric_norm(&rs.b_matrix);
        assert!(lyapunov_certificate(&rs) <= bound, "gammas {:?}", gs.gammas);
    }
    assert!(refused < 20, "{refused} refused draws");
}

#[test]
fn rk4_matches_matrix_exponential() {
    let (_, gs) = common::reference();
    let rs = reduced_matrix(&gs);
    let v0 = DVector::from_vec(vec![1.0, -0.5]);
    let path = reduced_ode_integrate(&rs, &v0, 0.5, 1e-4).unwrap();
    let worst = path
        .iter()
        .map(|(t, v)| (v - expm_2x2(&rs.m_matrix, *t) * &v0).amax())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst:e}");
    assert!((path.last().unwrap().0 - 0.5).abs() <= 1e-15);
}

#[test]
fn rk4_step_limit_enforced() {
    let (_, gs) = common::reference();
    let rs = reduced_matrix(&gs);
    let v0 = DVector::from_vec(vec![1.0, 1.0]);
    assert!(matches!(reduced_ode_integrate(&rs, &v0, 1.0, 0.01), Err(Error::StepSize { .. })));
}

#[test]
fn reference_modal_identity_converges_at_second_order() {
    let (s, gs) = common::reference();
    for &gamma in &gs.gammas {
        let r = modal_identity_refinement(gamma, 1.0, &s, &MS).unwrap();
        for (coarse, fine) in r.iter().zip(r.iter().skip(1)) {
            for (c, f) in coarse.iter().zip(fine) {
                let ratio = c / f;
                assert!((3.0..=5.3).contains(&ratio), "gamma {gamma}: ratio {ratio}");
            }
        }
        for o in observed_orders(&MS, &r).concat() {
            assert!((1.7..=2.3).contains(&o), "gamma {gamma}: order {o}");
        }
    }
}

#[test]
fn modal_identity_residual_is_linear_in_v() {
    let (s, _) = common::reference();
    let one = modal_identity_refinement(15.0, 1.0, &s, &[200]).unwrap();
    let three = modal_identity_refinement(15.0, -3.0, &s, &[200]).unwrap();
    for (a, b) in one[0].iter().zip(&three[0]) {
        assert!((3.0 * a - b).abs() <= 1e-9 * b.abs() + 1e-13, "{a:e} {b:e}");
    }
}

#[test]
fn lift_satisfies_discrete_system() {
    let (s, _) = common::reference();
    let lift = solve_lift(17.5, 2.0, &Grid::new(300).unwrap(), &s).unwrap();
    assert_eq!(lift.psi.left(), 0.0);
    assert_eq!(lift.psi.right(), 2.0);
    assert!(lift.residual(&s) <= 1e-8);
}

#[test]
fn lift_needs_enough_nodes() {
    let (s, _) = common::reference();
    let err = solve_lift(15.0, 1.0, &Grid::new(15).unwrap(), &s).unwrap_err();
    assert!(matches!(err, Error::GridTooCoarse { m: 15, required: 16 }));
}

#[test]
fn v_transform_rejects_incompatible_states() {
    let (s, gs) = common::reference();
    let grid = Grid::new(100).unwrap();
    let law = FeedbackLaw::new(&gs, &s, Window::full());
    let u = StateField::from_fn(grid, 0.0, |x| 5.0 * x * x.exp());
    assert!(matches!(v_transform(&u, &law, &grid), Err(Error::BoundaryMismatch(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weighted_norm_contracts_at_gamma1(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (_, gs, _) = common::random_gains(&mut rng, 3);
        let rs = reduced_matrix(&gs);
        let v0 = DVector::from_fn(gs.n(), |_, _| rng.gen_range(-1.0..1.0));
        let dt = (0.1 / rs.gamma_max).min(1e-3);
        let path = reduced_ode_integrate(&rs, &v0, 0.3, dt).unwrap();
        let n0 = weighted_norm(&rs.b_matrix, &v0);
        for (t, v) in &path {
            let bound = n0 * (-rs.gamma1 * t).exp() * (1.0 + 1e-6);
            prop_assert!(weighted_norm(&rs.b_matrix, v) <= bound, "t = {}", t);
        }
    }

    #[test]
    fn lift_is_linear_in_boundary_value(v in -10.0f64..10.0, gamma in 11.0f64..60.0) {
        let (s, _) = common::reference();
        let g = Grid::new(96).unwrap();
        let unit = solve_lift(gamma, 1.0, &g, &s).unwrap();
        let scaled = solve_lift(gamma, v, &g, &s).unwrap();
        for (a, b) in unit.psi.values().iter().zip(scaled.psi.values()) {
            prop_assert!((a * v - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
}
