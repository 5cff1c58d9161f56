//! Fixtures shared by the criterion benches in `benches/`.

use std::f64::consts::E;

use qakit_core::gfun::{CoeffFn, Cut, StructuredUD, TestFunction};
use qakit_core::qa::Ladder;
use qakit_core::svf::{Locus, SlowlyVaryingFn};

/// Three structural terms of degree 1/2 with a smooth cut at 1.
pub fn structural(l: SlowlyVaryingFn) -> StructuredUD {
    let c = [(1.0, 0.5), (-0.7, 1.2), (0.4, -0.3)];
    c.iter()
        .enumerate()
        .fold(StructuredUD::new(Locus::Infinity), |f, (m, &(cp, cm))| {
            f.with_term(m, CoeffFn::power_noninteger(cp, cm, 0.5, m, l, Cut::SmoothInner(1.0)))
        })
}

/// `H(x - e)/x`.
pub fn reciprocal_tail() -> CoeffFn {
    CoeffFn::Power {
        c_plus: 1.0,
        c_minus: 0.0,
        power: -1.0,
        left_sign: -1.0,
        svf: SlowlyVaryingFn::one(Locus::Infinity),
        cut: Cut::SharpInner(E),
    }
}

pub fn bump() -> TestFunction {
    TestFunction::bump(0.5, 1.0).expect("valid bump")
}

/// Seven scales from 1 to 1e6.
pub fn ladder() -> Ladder {
    Ladder::new(1.0, 10.0, 7).expect("valid ladder")
}
