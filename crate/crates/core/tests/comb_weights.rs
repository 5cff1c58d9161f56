use approx::assert_relative_eq;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use qakit_core::comb::oracle::{bell_factorial_recurrence, bell_factorial_series, count_set_partitions};
use qakit_core::comb::{
    bell_factorial, binomial, exp_chain_identity, factorial, recip_coeff, recip_derivative_oracle, stirling2,
    verify_suite,
};
use qakit_core::weights::{
    check_conditions, default_a_grid, default_h_grid, estimate_tail_constants, tail_factorial_sum, tail_stirling_sum,
    WeightSequence,
};

#[test]
fn suite_passes_at_default_size() {
    let rows = verify_suite(12);
    assert!(!rows.is_empty());
    for r in rows {
        assert!(r.passed, "{}: {}", r.name, r.detail);
    }
}

#[test]
fn small_reciprocal_coefficients() {
    // d/dx x^-2 phi(1/x) = -2 x^-3 phi(1/x) - x^-4 phi'(1/x)
    assert_eq!(recip_coeff(1, 0).unwrap(), BigInt::from(-2));
    assert_eq!(recip_coeff(1, 1).unwrap(), BigInt::from(-1));
    assert_eq!(recip_coeff(0, 0).unwrap(), BigInt::from(1));
    assert!(recip_coeff(2, 3).is_err());
}

#[test]
fn stirling_row_sums_are_bell_numbers() {
    let bell = [1u64, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
    for (n, b) in bell.iter().enumerate() {
        let sum: BigInt = (0..=n).map(|k| stirling2(n, k)).sum();
        assert_eq!(sum, BigInt::from(*b));
    }
}

#[test]
fn gevrey_two_tail_sums_have_closed_forms() {
    let m = WeightSequence::gevrey(2.0, 60).unwrap();
    // sum l^k / k! = e^l
    for l in [0.25, 1.0, 4.0] {
        let s = tail_factorial_sum(&m, l, 0, 1e-14).unwrap();
        assert_relative_eq!(s.value(), f64::exp(l), max_relative = 1e-13);
    }
    // sum l^k / k!^2 = I_0(2 sqrt l)
    let bessel = [
        (0.25, 1.266_065_877_752_008_3),
        (1.0, 2.279_585_302_336_067_3),
        (4.0, 11.301_921_952_136_33),
    ];
    for (l, v) in bessel {
        assert_relative_eq!(
            tail_stirling_sum(&m, l, 0, 1e-14).unwrap().value(),
            v,
            max_relative = 1e-13
        );
    }
    // S(k+1, 2) = 2^k - 1
    for (l, v) in [(1.0, 1.972_765_577_166_556_6), (4.0, 37.906_632_270_939_17)] {
        assert_relative_eq!(
            tail_stirling_sum(&m, l, 1, 1e-14).unwrap().value(),
            v,
            max_relative = 1e-13
        );
    }
}

#[test]
fn tail_constants_for_gevrey_sequences() {
    for s in [1.5, 2.0, 3.0] {
        let m = WeightSequence::gevrey(s, 40).unwrap();
        let r = estimate_tail_constants(&m, 1.0, 30, 1e-10).unwrap();
        assert!(r.satisfied, "s={s}");
        assert!(r.factorial.inequality_holds(r.factorial.constant));
        assert!(r.stirling.inequality_holds(r.stirling.constant));
    }
}

#[test]
fn explicit_table_cannot_certify_m3() {
    let m = WeightSequence::gevrey(2.0, 20).unwrap();
    let table = WeightSequence::from_log_values(m.log_values().to_vec()).unwrap();
    assert!(check_conditions(&m, &default_a_grid(), &default_h_grid())
        .unwrap()
        .all_hold());
    assert!(check_conditions(&table, &default_a_grid(), &default_h_grid()).is_err());
}

#[test]
fn broken_convexity_is_located() {
    let m = WeightSequence::gevrey(2.0, 20).unwrap();
    let bent = m.with_entry(7, m.log_values()[7] + 5.0).unwrap();
    let r = qakit_core::weights::check_log_convexity(&bent);
    assert!(!r.holds);
    assert_eq!(r.violations, vec![7]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stirling_counts_partitions(n in 0usize..11, k in 0usize..11) {
        prop_assert_eq!(stirling2(n, k), BigInt::from(count_set_partitions(n, k)));
    }

    #[test]
    fn bell_forms_agree(k in 1usize..16, j in 1usize..16) {
        prop_assume!(j <= k);
        let closed = bell_factorial(k, j).unwrap();
        prop_assert_eq!(&closed, &bell_factorial_series(k, j));
        prop_assert_eq!(&closed, &bell_factorial_recurrence(k, j));
    }

    #[test]
    fn reciprocal_identity(m in 0usize..10, j0 in 0usize..8) {
        prop_assert!(recip_derivative_oracle(m, j0).unwrap().holds());
    }

    #[test]
    fn reciprocal_bound(m in 0usize..24, j in 0usize..24) {
        prop_assume!(j <= m);
        let c = recip_coeff(m, j).unwrap();
        let bound = factorial(m) / factorial(j) * (BigInt::from(1) << (2 * m));
        prop_assert!(c.magnitude() <= bound.magnitude());
    }

    #[test]
    fn exp_chain_for_random_polynomials(n in 0usize..8, coeffs in prop::collection::vec(-20i64..20, 1..6)) {
        let phi: Vec<BigRational> = coeffs.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect();
        let (lhs, rhs) = exp_chain_identity(n, &phi);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn binomial_symmetry(n in 0i64..40, k in 0i64..40) {
        prop_assume!(k <= n);
        prop_assert_eq!(binomial(n, k), binomial(n, n - k));
    }

    #[test]
    fn tail_sums_decrease_in_p(s in 1.2f64..4.0, l in 0.1f64..5.0, p in 0usize..20) {
        let m = WeightSequence::gevrey(s, 40).unwrap();
        let a = tail_factorial_sum(&m, l, p, 1e-12).unwrap();
        let b = tail_factorial_sum(&m, l, p + 1, 1e-12).unwrap();
        prop_assert!(b.ln_value <= a.ln_value);
    }
}
