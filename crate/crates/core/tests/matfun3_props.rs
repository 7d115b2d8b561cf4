mod common;

use approx::assert_relative_eq;
use common::{char_poly_at, expm_oracle};
use nalgebra::Matrix3;
use proptest::prelude::*;
use pulsedose_core::matfun3::{
    cubic_eigenvalues, divided_differences, expm, matrix_function, similarity, spectral_radius, Exp, ScalarFn,
};
use pulsedose_core::{Error, Mat3, PlantParams};

fn plant(alpha: f64) -> PlantParams {
    PlantParams::new(alpha, 2.0, 3.2425).unwrap()
}

/// `μ(x) = 1/(e^{−x} − 1)`, `ν(x) = −xμ(x)`, `ϱ(x) = x/(1 − e^x)`.
fn mu(x: f64) -> f64 {
    1.0 / (-x).exp_m1()
}

fn nu(x: f64) -> f64 {
    -x * mu(x)
}

fn varrho(x: f64) -> f64 {
    x / -x.exp_m1()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn opitz_matches_scaling_and_squaring(alpha in 1e-6..=0.1_f64, t in 1e-6..=100.0_f64) {
        let p = plant(alpha);
        let got = expm(&p, t);
        let want = expm_oracle(&p, t);
        for i in 0..3 {
            for j in 0..3 {
                let (g, w) = (got[(i, j)], want[(i, j)]);
                if j > i {
                    prop_assert_eq!(g, 0.0);
                } else {
                    prop_assert!(((g - w) / w).abs() <= 1e-10, "entry ({}, {}): {} vs {}", i, j, g, w);
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn similarity_identity(alpha in 1e-3..=0.1_f64, t in 0.1..=50.0_f64) {
        let p = plant(alpha);
        let (s, s_inv) = similarity(&p);
        let prod = s * s_inv;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod[(i, j)] - want).abs() <= 1e-10 * s.max_abs() * s_inv.max_abs());
            }
        }
        let d = Mat3::diag(p.poles().map(|a| (-a * t).exp()));
        let via_similarity = s * d * s_inv;
        let opitz = expm(&p, t);
        let scale = s.max_abs() * s_inv.max_abs();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((via_similarity[(i, j)] - opitz[(i, j)]).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn mu_and_nu_are_positive_on_b(alpha in 1e-3..=0.1_f64, t in 0.5..=100.0_f64) {
        let p = plant(alpha);
        for f in [mu as fn(f64) -> f64, nu] {
            let m = matrix_function(&p, t, &f).unwrap();
            prop_assert!(m.column(0).iter().all(|&v| v > 0.0), "{:?}", m.column(0));
        }
    }

    #[test]
    fn varrho_output_is_negative(alpha in 1e-3..=0.1_f64, t in 0.5..=100.0_f64) {
        let p = plant(alpha);
        let m = matrix_function(&p, t, &varrho).unwrap();
        prop_assert!(m[(2, 0)] < 0.0);
        // same quantity through the resolvent: C A (I − e^{AT})⁻¹ B
        let z = (Mat3::IDENTITY - expm(&p, t)).solve_lower([1.0, 0.0, 0.0]).unwrap();
        let resolvent = p.a_matrix().mul_vec(z)[2];
        prop_assert!(resolvent < 0.0);
        prop_assert!(((m[(2, 0)] / t - resolvent) / resolvent).abs() < 1e-8);
    }

    #[test]
    fn mean_value_bounds_for_convex_functions(x0 in -10.0..0.0_f64, h in 1e-3..5.0_f64) {
        let x1 = x0 - h;
        let t = divided_differences(f64::exp, &[x0, x1]).unwrap();
        // exp′ = exp is increasing
        prop_assert!(t.get(0, 1) >= x1.exp() * (1.0 - 1e-12));
        prop_assert!(t.get(0, 1) <= x0.exp() * (1.0 + 1e-12));
        let t = divided_differences(mu, &[x0 - 0.1, x1 - 0.1]).unwrap();
        let dmu = |x: f64| { let e = (-x).exp(); e / ((e - 1.0) * (e - 1.0)) };
        let (lo, hi) = (dmu(x0 - 0.1).min(dmu(x1 - 0.1)), dmu(x0 - 0.1).max(dmu(x1 - 0.1)));
        prop_assert!(t.get(0, 1) >= lo * (1.0 - 1e-9) && t.get(0, 1) <= hi * (1.0 + 1e-9));
    }

    #[test]
    fn stable_exp_differences_agree_with_recursion(x0 in -20.0..0.0_f64, d1 in 0.5..5.0_f64, d2 in 0.5..5.0_f64) {
        let nodes = [x0, x0 - d1, x0 - d1 - d2];
        let t = divided_differences(f64::exp, &nodes).unwrap();
        assert_relative_eq!(Exp::UNIT.dd2(nodes[0], nodes[1], nodes[2]), t.get(0, 2), max_relative = 1e-10);
    }

    #[test]
    fn cubic_roots_match_general_eigensolver(entries in prop::array::uniform9(-5.0..5.0_f64)) {
        let m = Mat3([
            [entries[0], entries[1], entries[2]],
            [entries[3], entries[4], entries[5]],
            [entries[6], entries[7], entries[8]],
        ]);
        let spec = cubic_eigenvalues(&m);
        let oracle = Matrix3::from_fn(|i, j| m[(i, j)]).complex_eigenvalues();
        // every oracle eigenvalue is matched by one of ours
        for z in oracle.iter() {
            let best = spec.eigenvalues.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best <= 1e-7 * (1.0 + z.norm()), "{:?} vs {:?}", spec.eigenvalues, oracle);
        }
        let scale = 1.0 + m.max_abs().powi(3);
        for w in spec.eigenvalues.iter().filter(|w| w.im == 0.0) {
            prop_assert!(char_poly_at(&m, w.re).abs() <= 1e-9 * scale);
        }
        let rho = oracle.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!((spectral_radius(&spec) - rho).abs() <= 1e-7 * (1.0 + rho));
    }
}

#[test]
fn confluent_nodes_are_rejected() {
    let err = divided_differences(f64::exp, &[-1.0, -1.0 - 1e-12]).unwrap_err();
    assert!(matches!(err, Error::NodesTooClose { i: 0, j: 1, .. }));
}

#[test]
fn transition_of_open_loop_has_slowest_pole_radius() {
    for alpha in [0.01, 0.0374, 0.1] {
        let p = plant(alpha);
        let rho = spectral_radius(&cubic_eigenvalues(&expm(&p, 20.0)));
        assert_relative_eq!(rho, (-alpha * 20.0).exp(), max_relative = 1e-12);
    }
}

#[test]
fn expm_at_zero_is_identity() {
    assert_eq!(expm(&plant(0.05), 0.0), Mat3::IDENTITY);
}
