use expfunc_core::bgamma::{BernsteinGammaEvaluator, Route};
use expfunc_core::catalog::{bernstein_from_json, levy_from_json};
use expfunc_core::density::{cdf, InversionPolicy};
use expfunc_core::mc::{simulate_i, PathSimConfig};
use expfunc_core::mellin::MellinObject;
use expfunc_core::{BernsteinFunction, Complex64 as C, Error, LevyExponent, PhiKind};
use proptest::prelude::*;
use serde_json::json;

fn bernstein() -> impl Strategy<Value = BernsteinFunction> {
    prop_oneof![
        (0.0..3.0f64, 0.1..2.0f64).prop_map(|(q, d)| PhiKind::Affine { q, d }),
        (0.0..2.0f64, 0.05..0.95f64, 0.0..1.0f64).prop_map(|(q, alpha, c)| PhiKind::Power { q, alpha, c }),
        (0.05..0.95f64, 0.0..2.0f64).prop_map(|(a, extra)| PhiKind::ShiftedRatio { a, b: 1.0 - a + extra }),
        (0.0..2.0f64, 0.05..0.95f64).prop_map(|(a, b)| PhiKind::GammaRatio { a, b }),
        (0.1..3.0f64).prop_map(|a| PhiKind::Ratio { a }),
        (0.05..0.95f64).prop_map(|q| PhiKind::QGamma { q }),
        (0.0..2.0f64, 0.1..2.0f64, 0.1..3.0f64).prop_map(|(q, c, theta)| PhiKind::LogGamma { q, c, theta }),
        (0.0..2.0f64, 0.1..2.0f64, 0.0..2.0f64).prop_map(|(q, s, b)| PhiKind::InverseGaussian { q, s, b }),
    ]
    .prop_map(|k| BernsteinFunction::new(k).unwrap())
}

fn brownian() -> impl Strategy<Value = LevyExponent> {
    (0.05..3.0f64, 0.2..3.0f64, -1.5..1.5f64).prop_map(|(q, s2, mu)| LevyExponent::brownian(q, s2, mu).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bernstein_is_positive_increasing_concave(phi in bernstein(), x in 0.01..30.0f64, h in 0.01..2.0f64) {
        let (a, b, c) = (phi.eval_real(x).unwrap(), phi.eval_real(x + h).unwrap(), phi.eval_real(x + 2.0 * h).unwrap());
        prop_assert!(a > 0.0);
        prop_assert!(b >= a * (1.0 - 1e-13));
        prop_assert!(c - 2.0 * b + a <= 1e-12 * c.abs().max(1.0));
    }

    #[test]
    fn wgamma_recurrence_and_normalisation(phi in bernstein(), re in 0.2..12.0f64, im in -25.0..25.0f64) {
        let ev = BernsteinGammaEvaluator::new(phi).unwrap();
        let z = C::new(re, im);
        for route in [Route::Auto, Route::Generic] {
            let w0 = ev.wgamma_route(z, route).unwrap().value;
            let w1 = ev.wgamma_route(z + 1.0, route).unwrap().value;
            let r = (w1 - ev.phi().eval(z).unwrap() * w0).norm() / w1.norm();
            prop_assert!(r < 1e-9, "route {:?} residual {}", route, r);
            let one = ev.wgamma_route(C::new(1.0, 0.0), route).unwrap().value;
            prop_assert!((one - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn wgamma_is_real_on_the_axis_and_conjugate_symmetric(phi in bernstein(), re in 0.2..8.0f64, im in 0.1..15.0f64) {
        let ev = BernsteinGammaEvaluator::new(phi).unwrap();
        let w = ev.wgamma(C::new(re, im)).unwrap();
        let wc = ev.wgamma(C::new(re, -im)).unwrap();
        prop_assert!((w - wc.conj()).norm() <= 1e-10 * w.norm());
        prop_assert!(ev.wgamma(C::new(re, 0.0)).unwrap().re > 0.0);
    }

    #[test]
    fn psi_at_zero_is_nonpositive(l in brownian()) {
        prop_assert!(l.psi_real(0.0).unwrap() <= 0.0);
        let pp = l.phi_plus().eval_real(0.0).unwrap();
        let pm = l.phi_minus().eval_real(0.0).unwrap();
        prop_assert!((l.psi_real(0.0).unwrap() + pp * pm).abs() < 1e-12);
    }

    #[test]
    fn mellin_recurrence_and_unit_mass(l in brownian(), re in 0.05..0.95f64, im in -10.0..10.0f64) {
        let m = MellinObject::new(l).unwrap();
        let (lo, hi) = m.strip();
        let re = lo.max(0.0) + re * (hi.min(2.0) - lo.max(0.0));
        let z = C::new(re, im);
        prop_assert!(m.recurrence_check(z).unwrap() < 1e-8);
        prop_assert!((m.eval(C::new(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn cdf_is_monotone(q in 0.5..4.0f64, x in 0.05..0.9f64) {
        let m = MellinObject::new(LevyExponent::killed_drift(q, 1.0).unwrap()).unwrap();
        let pol = InversionPolicy::default();
        let a = cdf(&m, x, &pol).unwrap().value;
        let b = cdf(&m, x + 0.05, &pol).unwrap().value;
        prop_assert!(b >= a - 1e-9);
        prop_assert!((0.0..=1.0 + 1e-9).contains(&a));
    }

    #[test]
    fn catalog_builds_match_direct_constructors(q in 0.1..3.0f64, s2 in 0.2..3.0f64, mu in -1.0..1.0f64) {
        let a = levy_from_json("brownian", &json!({"q": q, "sigma2": s2, "mu": mu})).unwrap();
        let b = LevyExponent::brownian(q, s2, mu).unwrap();
        let z = C::new(0.3, 1.7);
        prop_assert!((a.psi(z).unwrap() - b.psi(z).unwrap()).norm() < 1e-14);
        let phi = bernstein_from_json("affine", &json!({"q": q})).unwrap();
        prop_assert!((phi.eval_real(2.0).unwrap() - (q + 2.0)).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn simulation_is_deterministic_for_a_seed(seed in any::<u64>()) {
        let l = LevyExponent::killed_drift(2.0, 1.0).unwrap();
        let cfg = PathSimConfig::new(1e-2, 200, seed);
        let a = simulate_i(&l, &cfg).unwrap();
        let b = simulate_i(&l, &cfg).unwrap();
        prop_assert_eq!(a.values, b.values);
    }
}

#[test]
fn unknown_catalog_keys_are_rejected() {
    assert!(matches!(bernstein_from_json("power", &json!({"alpha": 0.5, "beta": 1})), Err(Error::Param(_))));
    assert!(matches!(levy_from_json("nothing", &json!({})), Err(Error::UnsupportedFamily(_))));
}
