use std::f64::consts::E;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qakit_core::gfun::{
    dilate_pair, pair_structured, zspace_norm, CoeffFn, Cut, ModelDistribution, StructuredUD, TestFunction,
};
use qakit_core::quad::{integrate, integrate_with_breaks, Endpoint, QuadOptions};
use qakit_core::svf::{Locus, SlowlyVaryingFn};
use qakit_core::weights::WeightSequence;
use qakit_core::Error;

fn one() -> SlowlyVaryingFn {
    SlowlyVaryingFn::one(Locus::Infinity)
}

fn poly_deriv(c: &[f64], m: usize) -> Vec<f64> {
    let mut c = c.to_vec();
    for _ in 0..m {
        c = c.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect();
    }
    c
}

#[test]
fn half_power_on_shifted_bump_matches_reference() {
    // 40-digit quadrature of int_1^3 x^(1/2) exp(-1/(1-(x-2)^2)) dx
    let reference = 0.624_713_308_533_758_6;
    let phi = TestFunction::bump(2.0, 1.0).unwrap();
    let v = ModelDistribution::HomogeneousPlus(0.5).pair(&phi, 1e-12).unwrap();
    assert_abs_diff_eq!(v, reference, epsilon = 1e-10);
}

#[test]
fn homogeneous_kinds_reject_non_integrable_degree() {
    let phi = TestFunction::bump(0.0, 1.0).unwrap();
    assert!(ModelDistribution::HomogeneousPlus(-1.0).pair(&phi, 1e-10).is_err());
    assert!(ModelDistribution::HomogeneousMinus(-1.5).pair(&phi, 1e-10).is_err());
}

#[test]
fn order_overflow_is_reported() {
    let phi = TestFunction::bump(0.0, 1.0).unwrap();
    let f = StructuredUD::new(Locus::Infinity).with_term(
        30,
        CoeffFn::Bump {
            amplitude: 1.0,
            center: 0.0,
            radius: 1.0,
        },
    );
    assert!(matches!(
        pair_structured(&f, &phi, 1e-8),
        Err(Error::OrderOverflow { requested: 30, max: 24 })
    ));
}

#[test]
fn first_order_polynomial_term_by_parts() {
    let phi = TestFunction::bump(0.1, 1.0).unwrap();
    let coeffs = vec![0.5, -1.0, 2.0, 0.25];
    let f = StructuredUD::new(Locus::Infinity).with_term(
        1,
        CoeffFn::Poly {
            coeffs: coeffs.clone(),
            support: (-3.0, 3.0),
        },
    );
    let d = poly_deriv(&coeffs, 1);
    let oracle = integrate(
        |x| d.iter().rev().fold(0.0, |a, c| a * x + c) * phi.eval(x),
        -0.9,
        1.1,
        &QuadOptions::default(),
    )
    .unwrap()
    .value;
    assert_abs_diff_eq!(pair_structured(&f, &phi, 1e-12).unwrap(), oracle, epsilon = 1e-12);
}

#[test]
fn pairing_is_linear() {
    let phi = TestFunction::poly_bump(vec![1.0, 0.5], 0.2, 1.0).unwrap();
    let f =
        StructuredUD::new(Locus::Infinity).with_term(0, CoeffFn::power_noninteger(1.0, 2.0, 0.5, 0, one(), Cut::None));
    let g = StructuredUD::new(Locus::Infinity).with_term(
        2,
        CoeffFn::Bump {
            amplitude: 3.0,
            center: 0.4,
            radius: 0.5,
        },
    );
    let mut both = f.clone();
    both.terms.extend(g.terms.clone());
    let tol = 1e-11;
    let sum = pair_structured(&f, &phi, tol).unwrap() + pair_structured(&g, &phi, tol).unwrap();
    assert_abs_diff_eq!(pair_structured(&both, &phi, tol).unwrap(), sum, epsilon = 2.0 * tol);
}

#[test]
fn unit_scale_is_plain_pairing() {
    let phi = TestFunction::bump(0.3, 1.0).unwrap();
    let f = StructuredUD::new(Locus::Infinity).with_term(
        1,
        CoeffFn::power_noninteger(1.0, -1.0, 0.5, 1, one(), Cut::SmoothInner(0.2)),
    );
    assert_eq!(
        dilate_pair(&f, 1.0, &phi, 1e-10).unwrap(),
        pair_structured(&f, &phi, 1e-10).unwrap()
    );
}

#[test]
fn dilation_matches_change_of_variables() {
    // f = H(x - e) x^-1/2 against a bump on (-1, 1): <f(s x), phi> = s^-1 int_e^s f(y) phi(y/s) dy
    let phi = TestFunction::bump(0.0, 1.0).unwrap();
    let f = StructuredUD::new(Locus::Infinity).with_term(
        0,
        CoeffFn::power_noninteger(1.0, 0.0, -0.5, 0, one(), Cut::SharpInner(E)),
    );
    for s in [5.0, 50.0, 5e3] {
        let direct = integrate(|y| y.powf(-0.5) * phi.eval(y / s), E, s, &QuadOptions::abs(1e-14))
            .unwrap()
            .value
            / s;
        assert_abs_diff_eq!(dilate_pair(&f, s, &phi, 1e-12).unwrap(), direct, epsilon = 1e-12);
    }
}

#[test]
fn zspace_norm_examples() {
    let w = WeightSequence::gevrey(2.0, 64).unwrap();
    let bump = TestFunction::bump(0.0, 1.0).unwrap();
    let grid: Vec<f64> = (-100..=100).map(|i| i as f64 / 100.0).collect();
    let r = zspace_norm(&bump, &w, 0.0, 1.0, 0, &grid).unwrap();
    assert_abs_diff_eq!(r.value, (-1.0f64).exp(), epsilon = 1e-15);
    assert_eq!((r.argmax_x, r.argmax_m), (0.0, 0));

    let g = TestFunction::gaussian(1.0).unwrap();
    let wide: Vec<f64> = (-800..=800).map(|i| i as f64 / 40.0).collect();
    let r = zspace_norm(&g, &w, 0.0, 1.0, 20, &wide).unwrap();
    assert!(r.value.is_finite() && r.argmax_m < 20 && r.argmax_x.abs() < 10.0);

    // phi(x/eps) has m-th derivative eps^-m phi^(m)(x/eps)
    let eps = 0.25;
    let narrow = TestFunction::gaussian(eps).unwrap();
    for (m, x) in [(0usize, 0.1), (3, 0.2), (5, -0.05)] {
        assert_abs_diff_eq!(
            narrow.derivative(m, x),
            eps.powi(-(m as i32)) * g.derivative(m, x / eps),
            epsilon = 1e-12 * eps.powi(-(m as i32))
        );
    }
}

#[test]
fn delta_ignores_far_changes() {
    let a = TestFunction::poly_bump(vec![1.0, 2.0], 0.0, 1.0).unwrap();
    let f = StructuredUD::new(Locus::Infinity).with_point(2, 1.0);
    let g = f.clone().with_term(
        0,
        CoeffFn::Bump {
            amplitude: 1.0,
            center: 5.0,
            radius: 1.0,
        },
    );
    let d = ModelDistribution::Delta(2).pair(&a, 1e-12).unwrap();
    assert_eq!(pair_structured(&f, &a, 1e-12).unwrap(), d);
    assert_eq!(pair_structured(&g, &a, 1e-12).unwrap(), d);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transposition(
        m in 0usize..=6,
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..8),
        pcoeffs in prop::collection::vec(-1.0f64..1.0, 1..4),
        center in -0.5f64..0.5,
    ) {
        let phi = TestFunction::poly_bump(pcoeffs, center, 1.0).unwrap();
        let f = StructuredUD::new(Locus::Infinity).with_term(m, CoeffFn::Poly { coeffs: coeffs.clone(), support: (-4.0, 4.0) });
        let d = poly_deriv(&coeffs, m);
        let oracle = integrate(|x| d.iter().rev().fold(0.0, |a, c| a * x + c) * phi.eval(x), center - 1.0, center + 1.0, &QuadOptions::abs(1e-13)).unwrap().value;
        let mass = integrate(|x| (coeffs.iter().rev().fold(0.0, |a, c| a * x + c) * phi.derivative(m, x)).abs(), center - 1.0, center + 1.0, &QuadOptions::abs(1e-10)).unwrap().value;
        let got = pair_structured(&f, &phi, 1e-12).unwrap();
        prop_assert!((got - oracle).abs() <= 1e-10 * (1.0 + mass), "m={} got {} oracle {}", m, got, oracle);
    }

    #[test]
    fn homogeneity(alpha_i in 0usize..4, scale_i in 0usize..3, center in -0.8f64..0.8) {
        let alpha = [-0.5, 0.0, 0.5, 2.0][alpha_i];
        let scale = [2.0, 10.0, 100.0][scale_i];
        let phi = TestFunction::bump(center, 1.0).unwrap();
        let f = StructuredUD::new(Locus::Infinity).with_term(0, CoeffFn::power_noninteger(1.0, 0.0, alpha, 0, one(), Cut::None));
        let base = ModelDistribution::HomogeneousPlus(alpha).pair(&phi, 1e-13).unwrap();
        let v = dilate_pair(&f, scale, &phi, 1e-12).unwrap();
        prop_assert!((v - scale.powf(alpha) * base).abs() <= 1e-8 * (scale.powf(alpha) * base).abs().max(1e-300));
    }

    #[test]
    fn finite_part_without_corrections(k in 1usize..=4, center in -0.3f64..0.6) {
        // x^k times a bump vanishes to order k at 0
        let mut coeffs = vec![0.0; k];
        coeffs.push(1.0);
        let phi = TestFunction::poly_bump(coeffs, center, 1.0).unwrap();
        let pf = ModelDistribution::FinitePartPlus(k).pair(&phi, 1e-12).unwrap();
        let hi = center + 1.0;
        let plain = integrate(|x| x.powi(-(k as i32)) * phi.eval(x), 0.0, hi, &QuadOptions::abs(1e-13)).unwrap().value;
        prop_assert!((pf - plain).abs() <= 1e-9, "k={} pf={} plain={}", k, pf, plain);
    }

    #[test]
    fn reflection(alpha in -0.9f64..3.0, center in -0.7f64..0.7, radius in 0.5f64..2.0) {
        let phi = TestFunction::bump(center, radius).unwrap();
        let minus = ModelDistribution::HomogeneousMinus(alpha).pair(&phi, 1e-10).unwrap();
        let plus = ModelDistribution::HomogeneousPlus(alpha).pair(&phi.reflect(), 1e-10).unwrap();
        prop_assert_eq!(minus, plus);
    }

    #[test]
    fn log_identity_for_first_finite_part(center in -0.6f64..0.9, radius in 0.4f64..1.5) {
        let phi = TestFunction::bump(center, radius).unwrap();
        let (lo, hi) = phi.support();
        prop_assume!(hi > 0.05);
        let sing: Vec<(f64, Endpoint)> = if lo < 0.0 { vec![(0.0, Endpoint::Log)] } else { Vec::new() };
        let oracle = -integrate_with_breaks(|x| x.ln() * phi.derivative(1, x), lo.max(0.0), hi, &[], &sing, &QuadOptions::abs(1e-13)).unwrap().value;
        let pf = ModelDistribution::FinitePartPlus(1).pair(&phi, 1e-12).unwrap();
        prop_assert!((pf - oracle).abs() <= 1e-9);
    }
}
