mod common;

use std::f64::consts::PI;

use isoflow::series::*;
use isoflow::{Potential, Vec2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn recursion_matches_radial_taylor_through_degree_ten() {
    let pot = Potential::radial_analytic(Vec2::zeros(), vec![1.0], None).unwrap();
    for beta in [0.4, PI / 3.0, PI / 2.0, 2.5] {
        let g = gbeta_for_well(&pot, 0, beta, 10).unwrap();
        assert_eq!(g.terms.len(), 8);
        assert!(g.terms[0].is_zero());
        for (deg, coeffs) in common::radial_taylor(&[1.0], beta, 10) {
            let got = &g.terms[deg - 3];
            for (a, b) in got.coeffs.iter().zip(&coeffs) {
                assert!((a - b).abs() < 1e-9, "degree {deg}: {a} vs {b}");
            }
        }
        for odd in [5usize, 7, 9] {
            assert!(g.terms[odd - 3].max_abs() < 1e-12);
        }
    }
}

#[test]
fn recursion_matches_taylor_with_two_corrections() {
    let coeffs = [0.5, -0.2, 0.1];
    let pot = Potential::radial_analytic(Vec2::zeros(), coeffs.to_vec(), None).unwrap();
    let g = gbeta_for_well(&pot, 0, 1.2, 10).unwrap();
    for (deg, want) in common::radial_taylor(&coeffs, 1.2, 10) {
        for (a, b) in g.terms[deg - 3].coeffs.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn radial_series_agrees_with_closed_form_values() {
    let beta = 1.0;
    let g = gbeta_coefficients(&[HomogPoly::zero(3), HomogPoly::radial_power(2)], 1.0, 1.0, beta, 10).unwrap();
    for r in [0.02, 0.05, 0.1] {
        let closed = gbeta_radial(&[1.0], beta, r).unwrap();
        let series = g.g(Vec2::new(r * 0.6, r * 0.8));
        assert!((closed - series).abs() < 1e-10 * r.powi(4).max(1e-12) + 1e-14, "{closed} vs {series}");
    }
}

#[test]
fn residual_at_radius_one_tenth() {
    let pot = Potential::radial_analytic(Vec2::zeros(), vec![1.0], None).unwrap();
    for n in [8, 10] {
        let g = gbeta_for_well(&pot, 0, PI / 2.0, n).unwrap();
        let res = residual_wexp(&pot, &g, &ring_samples(&g, 0.1, 64));
        assert!(res <= 1e-8, "N = {n}: {res}");
    }
}

#[test]
fn residual_order_under_halving() {
    let pot = Potential::radial_analytic(Vec2::zeros(), vec![1.0], None).unwrap();
    for n in [4usize, 6] {
        let g = gbeta_for_well(&pot, 0, 1.1, n).unwrap();
        let r1 = residual_wexp(&pot, &g, &ring_samples(&g, 0.2, 64));
        let r2 = residual_wexp(&pot, &g, &ring_samples(&g, 0.1, 64));
        assert!(r1 / r2 >= 2f64.powi(n as i32 - 1), "N = {n}: {r1} / {r2}");
    }
}

#[test]
fn linearized_identity_matches_residual() {
    let pot = Potential::radial_analytic(Vec2::zeros(), vec![1.0, 0.3], None).unwrap();
    let beta = 0.9;
    let g = gbeta_for_well(&pot, 0, beta, 10).unwrap();
    let lam = lambda_matrix(1.0, 1.0, beta);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let p = Vec2::new(rng.gen_range(-0.08..0.08), rng.gen_range(-0.08..0.08));
        let gg = g.grad_g(p);
        let lhs = pot.value(p) - p.x * p.x - p.y * p.y;
        let rhs = 2.0 * (lam * p).dot(&gg) + gg.norm_squared();
        assert!((lhs - rhs).abs() <= 1e-8);
    }
}

#[test]
fn recursion_ignores_input_order() {
    let w = vec![
        HomogPoly::from_coeffs(vec![0.1, 0.2, -0.3, 0.4]).unwrap(),
        HomogPoly::from_coeffs(vec![1.0, 0.0, 2.0, 0.0, 1.0]).unwrap(),
        HomogPoly::from_coeffs(vec![0.0, 0.5, 0.0, 0.0, 0.0, -0.5]).unwrap(),
    ];
    let mut rev = w.clone();
    rev.reverse();
    let a = gbeta_coefficients(&w, 0.7, 1.9, 1.3, 9).unwrap();
    let b = gbeta_coefficients(&rev, 0.7, 1.9, 1.3, 9).unwrap();
    assert_eq!(a.terms, b.terms);
}

#[test]
fn degenerate_inputs() {
    assert!(matches!(solve_l(&HomogPoly::zero(2), 1.0, 1.0, 1.0), Err(isoflow::Error::Precondition(_))));
    assert!(gbeta_coefficients(&[], 1.0, 1.0, 1.0, 2).is_err());
    let g = gbeta_coefficients(&[], 1.0, 2.0, 1.0, 8).unwrap();
    assert!(g.terms.iter().all(|t| t.is_zero()));
}

proptest! {
    #[test]
    fn forward_then_inverse_is_identity(
        coeffs in proptest::collection::vec(-2.0f64..2.0, 5),
        l1 in 0.2f64..3.0, l2 in 0.2f64..3.0, beta in 0.05f64..3.09,
    ) {
        let p = HomogPoly::from_coeffs(coeffs).unwrap();
        let q = apply_l(&p, l1, l2, beta);
        let back = solve_l(&q, l1, l2, beta).unwrap();
        for (a, b) in back.coeffs.iter().zip(&p.coeffs) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        // defining identity on sample points
        let lam = lambda_matrix(l1, l2, beta);
        for k in 0..10 {
            let x = Vec2::new((k as f64).sin(), (1.7 * k as f64).cos());
            prop_assert!((2.0 * (lam * x).dot(&back.grad(x)) - q.eval(x)).abs() <= 1e-10 * (1.0 + q.max_abs()));
        }
    }

    #[test]
    fn stored_indices_are_homogeneous(deg in 3usize..12) {
        let p = HomogPoly::zero(deg);
        prop_assert_eq!(p.coeffs.len(), deg + 1);
        prop_assert_eq!(p.d1().degree, deg - 1);
        prop_assert_eq!(p.mul(&p).degree, 2 * deg);
    }
}
