mod common;

use std::sync::OnceLock;

use approx::{assert_abs_diff_eq, assert_relative_eq};
use balanced::form::op_norm;
use balanced::{build_quadrature, geodesic, BundleId, HermitianForm, Manifold, Problem};
use common::{random_form, rng};
use proptest::prelude::*;

fn line_p1() -> &'static Problem {
    static P: OnceLock<Problem> = OnceLock::new();
    P.get_or_init(|| Problem::new(BundleId::LineP1(3), 8).unwrap())
}

fn sum_11() -> &'static Problem {
    static P: OnceLock<Problem> = OnceLock::new();
    P.get_or_init(|| Problem::new(BundleId::Sum(1, 1), 6).unwrap())
}

fn problems() -> [&'static Problem; 2] {
    [line_p1(), sum_11()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integration_is_linear(
        values in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 5 * 11),
        alpha in -5.0f64..5.0,
    ) {
        let q = build_quadrature(Manifold::P1, 5).unwrap();
        let f: Vec<f64> = values.iter().map(|v| v.0).collect();
        let g: Vec<f64> = values.iter().map(|v| v.1).collect();
        let combo: Vec<f64> = f.iter().zip(&g).map(|(a, b)| alpha * a + b).collect();
        let lhs = q.integrate_real(&combo).unwrap();
        let rhs = alpha * q.integrate_real(&f).unwrap() + q.integrate_real(&g).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn normalization_fixes_determinant_and_ignores_scale(seed in any::<u64>(), log_c in -3.0f64..3.0) {
        let h = random_form(&mut rng(seed), 4);
        let c = 10f64.powf(log_c);
        let n = h.normalize().unwrap();
        assert_abs_diff_eq!(n.log_det().unwrap(), 0.0, epsilon = 1e-12);
        let nc = h.scaled(c).unwrap().normalize().unwrap();
        prop_assert!(op_norm(&(n.gram() - nc.gram())) <= 1e-12 * op_norm(n.gram()));
        let radius = h.boundedness_radius().unwrap();
        prop_assert!(radius >= 1.0);
        assert_relative_eq!(radius, h.scaled(c).unwrap().boundedness_radius().unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn t_operator_is_homogeneous(seed in any::<u64>(), log_c in -3.0f64..3.0) {
        let c = 10f64.powf(log_c);
        for p in problems() {
            let h = random_form(&mut rng(seed), p.dim());
            let th = p.t(&h).unwrap();
            let tch = p.t(&h.scaled(c).unwrap()).unwrap();
            prop_assert!(op_norm(&(tch.gram() - th.gram().scale(c))) <= 1e-11 * c * op_norm(th.gram()));
        }
    }

    #[test]
    fn trace_identity_and_monotonicity(seed in any::<u64>()) {
        for p in problems() {
            let h = random_form(&mut rng(seed), p.dim());
            let slack = 100.0 * p.eps_quad();
            prop_assert!(p.trace_residual(&h).unwrap() <= slack);
            let th = p.t(&h).unwrap();
            prop_assert!(p.z(&th).unwrap() <= p.z(&h).unwrap() + slack);
            prop_assert!(p.z_tilde(&th).unwrap() <= p.z_tilde(&h).unwrap() + slack);
            prop_assert!(th.log_det().unwrap() <= h.log_det().unwrap() + slack);
        }
    }

    #[test]
    fn z_tilde_is_scale_invariant(seed in any::<u64>(), log_c in -3.0f64..3.0) {
        let p = line_p1();
        let h = random_form(&mut rng(seed), p.dim());
        let a = p.z_tilde(&h).unwrap();
        let b = p.z_tilde(&h.scaled(10f64.powf(log_c)).unwrap()).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn geodesic_hits_endpoints_and_midpoint_is_geometric_mean(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h0 = random_form(&mut r, 3);
        let h1 = random_form(&mut r, 3);
        let tol = 1e-9 * (op_norm(h0.gram()) + op_norm(h1.gram()));
        prop_assert!(op_norm(&(geodesic(&h0, &h1, 0.0).unwrap().gram() - h0.gram())) <= tol);
        prop_assert!(op_norm(&(geodesic(&h0, &h1, 1.0).unwrap().gram() - h1.gram())) <= tol);
        let mid = geodesic(&h0, &h1, 0.5).unwrap().log_det().unwrap();
        assert_abs_diff_eq!(mid, 0.5 * (h0.log_det().unwrap() + h1.log_det().unwrap()), epsilon = 1e-9);
    }

    #[test]
    fn invalid_gram_is_rejected(shift in 0.0f64..5.0) {
        let mut g = HermitianForm::identity(3).into_gram();
        g[(1, 1)] = num_complex::Complex64::from(-shift);
        prop_assert!(HermitianForm::new(g).is_err());
    }
}
