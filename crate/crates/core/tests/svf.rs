use approx::assert_relative_eq;
use proptest::prelude::*;
use qakit_core::svf::{dehaan_check, potter_constant, ratio_limit_check, LIBRARY};
use qakit_core::{Locus, SlowlyVaryingFn};

fn at(s: &str, locus: Locus) -> SlowlyVaryingFn {
    SlowlyVaryingFn::parse(s, locus).unwrap()
}

#[test]
fn log_primitive_matches_simpson() {
    // composite Simpson in u = ln t as an independent check
    let simpson = |l: &SlowlyVaryingFn, a: f64, b: f64| {
        let (ua, ub) = (a.ln(), b.ln());
        let n = 20_000;
        let h = (ub - ua) / n as f64;
        let f = |u: f64| l.value(u.exp());
        let mut s = f(ua) + f(ub);
        for i in 1..n {
            s += f(ua + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    for s in ["log", "log^2", "3 * log^-1", "log * loglog", "loglog^-2"] {
        let l = at(s, Locus::Infinity);
        let lo = l.domain_floor() * 1.5;
        let got = l.log_primitive(lo, 1e9).unwrap();
        assert_relative_eq!(got, simpson(&l, lo, 1e9), max_relative = 1e-9);
    }
}

#[test]
fn origin_uses_reciprocal_argument() {
    let l = at("log^2", Locus::Origin);
    assert_relative_eq!(l.eval(1e-6).unwrap(), 1e6f64.ln().powi(2), max_relative = 1e-15);
    let r = ratio_limit_check(&l, 0.5, &[1e-12]).unwrap();
    let closed = (1.0 + 2f64.ln() / 1e12f64.ln()).powi(2) - 1.0;
    assert_relative_eq!(r[0], closed, max_relative = 1e-12);
}

#[test]
fn potter_constant_is_at_least_one() {
    let grid: Vec<f64> = (0..30).map(|i| 10f64.powf(i as f64 / 3.0)).collect();
    let xs: Vec<f64> = (-12..=12).map(|i| 2f64.powi(i)).collect();
    for s in LIBRARY {
        let rep = potter_constant(&at(s, Locus::Infinity), 0.25, &grid, &xs, None).unwrap();
        assert!(rep.c_gamma_estimate >= 1.0, "{s}");
        assert!(rep.max_violation <= 0.0, "{s}");
    }
    // a candidate below the estimate is reported as violated
    let rep = potter_constant(&at("log", Locus::Infinity), 0.25, &grid, &xs, Some(0.5)).unwrap();
    assert!(rep.max_violation > 0.0);
}

#[test]
fn dehaan_for_logarithm() {
    // b = log is exactly de Haan with L = 1, c = 1, k = 1
    let l = SlowlyVaryingFn::one(Locus::Infinity);
    let rep = dehaan_check(&|x: f64| x.ln(), &l, 1.0, 1, &[0.5, 2.0, 10.0], &[1e2, 1e4, 1e8], 1e-12).unwrap();
    assert!(rep.converged);
    // k = 2 flips the sign, so log no longer fits
    let rep = dehaan_check(&|x: f64| x.ln(), &l, 1.0, 2, &[2.0], &[1e2, 1e4], 1e-6).unwrap();
    assert!(!rep.converged);
    assert!(dehaan_check(&|x: f64| x, &l, 1.0, 0, &[2.0], &[1e2], 1e-6).is_err());
}

proptest! {
    #[test]
    fn reflection_swaps_loci(i in 0usize..LIBRARY.len(), e in 0.5f64..250.0) {
        let inf = at(LIBRARY[i], Locus::Infinity);
        let x = 10f64.powf(e);
        let (a, b) = (inf.reflected().eval(1.0 / x).unwrap(), inf.eval(x).unwrap());
        prop_assert!((a - b).abs() <= 1e-14 * b.abs());
    }

    #[test]
    fn log_primitive_is_additive(i in 0usize..LIBRARY.len(), a in 1.0f64..10.0, m in 1.0f64..10.0, b in 1.0f64..10.0) {
        let l = at(LIBRARY[i], Locus::Infinity);
        let (x, y, z) = (a.exp(), (a + m).exp(), (a + m + b).exp());
        let whole = l.log_primitive(x, z).unwrap();
        let parts = l.log_primitive(x, y).unwrap() + l.log_primitive(y, z).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-9 * whole.abs().max(1.0));
    }

    #[test]
    fn scaling_leaves_ratios_unchanged(i in 0usize..LIBRARY.len(), k in 0.1f64..10.0, e in 3.0f64..100.0) {
        let l = at(LIBRARY[i], Locus::Infinity);
        let x = 10f64.powf(e);
        let a = ratio_limit_check(&l, 3.0, &[x]).unwrap()[0];
        let b = ratio_limit_check(&l.scaled(k), 3.0, &[x]).unwrap()[0];
        prop_assert!((a - b).abs() <= 1e-12);
    }
}
