//! Test functions with closed-form derivatives of every order up to a
//! declared maximum.
//!
//! The bump `exp(-1/(1-t^2))` has `d^m/dt^m = N_m(t) (1-t^2)^(-2m) exp(-1/(1-t^2))`
//! with `N_{m+1} = N_m' (1-t^2)^2 + 4 m t N_m (1-t^2) - 2 t N_m`. The
//! integer polynomials `N_m` are built exactly and evaluated in double-double
//! arithmetic, since their coefficients cancel heavily near `|t| = 1`.

use std::sync::RwLock;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_MAX_ORDER: usize = 24;

/// Half-width, in units of the scale, beyond which a Gaussian and its
/// derivatives up to order 24 are below the smallest normal double.
pub const GAUSSIAN_REACH: f64 = 40.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFnKind {
    Bump {
        center: f64,
        radius: f64,
    },
    /// `p(x) * bump`, with `p` given by ascending coefficients in `x`.
    PolyBump {
        coeffs: Vec<f64>,
        center: f64,
        radius: f64,
    },
    Gaussian {
        scale: f64,
    },
}

/// `factor * phi^(shift)(sigma x)` for a base function `phi` of the given
/// kind and `sigma = -1` when reflected.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestFunction {
    kind: TestFnKind,
    max_order: usize,
    shift: usize,
    reflected: bool,
    factor: f64,
}

impl TestFunction {
    pub fn new(kind: TestFnKind, max_order: usize) -> Result<Self> {
        match &kind {
            TestFnKind::Bump { center, radius } | TestFnKind::PolyBump { center, radius, .. } => {
                if !(*radius > 0.0) || !radius.is_finite() || !center.is_finite() {
                    return Err(invalid(
                        "radius",
                        format!("bump needs a finite positive radius, got {radius}"),
                    ));
                }
            }
            TestFnKind::Gaussian { scale } => {
                if !(*scale > 0.0) || !scale.is_finite() {
                    return Err(invalid(
                        "scale",
                        format!("Gaussian needs a positive scale, got {scale}"),
                    ));
                }
            }
        }
        if let TestFnKind::PolyBump { coeffs, .. } = &kind {
            if coeffs.iter().any(|c| !c.is_finite()) {
                return Err(invalid("coeffs", "polynomial coefficients must be finite"));
            }
        }
        Ok(Self {
            kind,
            max_order,
            shift: 0,
            reflected: false,
            factor: 1.0,
        })
    }

    pub fn bump(center: f64, radius: f64) -> Result<Self> {
        Self::new(TestFnKind::Bump { center, radius }, DEFAULT_MAX_ORDER)
    }

    pub fn poly_bump(coeffs: Vec<f64>, center: f64, radius: f64) -> Result<Self> {
        Self::new(TestFnKind::PolyBump { coeffs, center, radius }, DEFAULT_MAX_ORDER)
    }

    pub fn gaussian(scale: f64) -> Result<Self> {
        Self::new(TestFnKind::Gaussian { scale }, DEFAULT_MAX_ORDER)
    }

    pub fn kind(&self) -> &TestFnKind {
        &self.kind
    }

    /// Highest derivative order available on this function.
    pub fn max_order(&self) -> usize {
        self.max_order.saturating_sub(self.shift)
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self.kind, TestFnKind::Gaussian { .. })
    }

    /// `x -> phi(-x)`.
    pub fn reflect(&self) -> Self {
        let mut out = self.clone();
        out.reflected = !out.reflected;
        out
    }

    /// `phi^(n)`.
    pub fn differentiated(&self, n: usize) -> Self {
        let mut out = self.clone();
        out.shift += n;
        if self.reflected && n % 2 == 1 {
            out.factor = -out.factor;
        }
        out
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.factor *= k;
        out
    }

    /// Closed support for compact kinds; `[-40 s, 40 s]` for a Gaussian of
    /// scale `s`, outside which every derivative underflows.
    pub fn support(&self) -> (f64, f64) {
        let (a, b) = match &self.kind {
            TestFnKind::Bump { center, radius } | TestFnKind::PolyBump { center, radius, .. } => {
                (center - radius, center + radius)
            }
            TestFnKind::Gaussian { scale } => (-GAUSSIAN_REACH * scale, GAUSSIAN_REACH * scale),
        };
        if self.reflected {
            (-b, -a)
        } else {
            (a, b)
        }
    }

    pub fn check_order(&self, m: usize) -> Result<()> {
        if m > self.max_order() {
            Err(Error::OrderOverflow {
                requested: m,
                max: self.max_order(),
            })
        } else {
            Ok(())
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `m`-th derivative at `x`, or an error past `max_order`.
    pub fn eval_derivative(&self, m: usize, x: f64) -> Result<f64> {
        self.check_order(m)?;
        Ok(self.derivative(m, x))
    }

    /// Unchecked [`eval_derivative`](Self::eval_derivative); callers verify
    /// the order once with [`check_order`](Self::check_order).
    pub fn derivative(&self, m: usize, x: f64) -> f64 {
        let total = m + self.shift;
        let (y, sign) = if self.reflected {
            (-x, if m % 2 == 1 { -1.0 } else { 1.0 })
        } else {
            (x, 1.0)
        };
        self.factor * sign * base_derivative(&self.kind, total, y)
    }
}

fn base_derivative(kind: &TestFnKind, m: usize, x: f64) -> f64 {
    match kind {
        TestFnKind::Bump { center, radius } => bump_derivative(*center, *radius, m, x),
        TestFnKind::PolyBump { coeffs, center, radius } => {
            if (x - center).abs() >= *radius {
                return 0.0;
            }
            // Leibniz over the polynomial factor
            let mut poly: Vec<f64> = coeffs.clone();
            let mut binom = 1.0;
            let mut total = 0.0;
            for i in 0..=m {
                if poly.is_empty() {
                    break;
                }
                let p = poly.iter().rev().fold(0.0, |acc, c| acc * x + c);
                total += binom * p * bump_derivative(*center, *radius, m - i, x);
                poly = poly.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
                binom = binom * (m - i) as f64 / (i + 1) as f64;
            }
            total
        }
        TestFnKind::Gaussian { scale } => {
            let u = x / scale;
            let (mut h0, mut h1) = (1.0, 2.0 * u);
            let h = if m == 0 {
                h0
            } else {
                for n in 1..m {
                    let h2 = 2.0 * u * h1 - 2.0 * n as f64 * h0;
                    h0 = h1;
                    h1 = h2;
                }
                h1
            };
            let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
            sign * scale.powi(-(m as i32)) * h * (-u * u).exp()
        }
    }
}

/// Double-double coefficients of `N_0, N_1, ...`, ascending in `t`.
static BUMP_POLYS: RwLock<Vec<Vec<(f64, f64)>>> = RwLock::new(Vec::new());

fn bump_polys_upto(m: usize) {
    if BUMP_POLYS.read().expect("bump cache poisoned").len() > m {
        return;
    }
    let mut cache = BUMP_POLYS.write().expect("bump cache poisoned");
    if cache.len() > m {
        return;
    }
    let mut n: Vec<BigInt> = vec![BigInt::from(1)];
    let mut exact = vec![n.clone()];
    for j in 0..m {
        n = next_bump_poly(&n, j);
        exact.push(n.clone());
    }
    *cache = exact.iter().map(|p| p.iter().map(split_dd).collect()).collect();
}

fn next_bump_poly(n: &[BigInt], m: usize) -> Vec<BigInt> {
    let deg = n.len() + 3;
    let mut out = vec![BigInt::zero(); deg + 1];
    // N' (1 - 2t^2 + t^4)
    for (i, c) in n.iter().enumerate().skip(1) {
        let d = c * BigInt::from(i);
        out[i - 1] += &d;
        out[i + 1] -= &d * 2;
        out[i + 3] += &d;
    }
    // 4 m t N (1 - t^2) - 2 t N
    let four_m = BigInt::from(4 * m);
    for (i, c) in n.iter().enumerate() {
        out[i + 1] += &four_m * c - c * 2;
        out[i + 3] -= &four_m * c;
    }
    while out.len() > 1 && out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

fn split_dd(c: &BigInt) -> (f64, f64) {
    let hi = c.to_f64().expect("finite");
    // the rounded value of an integer is an integer, so this is exact
    let hi_int = BigInt::from_f64(hi).expect("finite");
    let lo = (c - hi_int).to_f64().expect("finite");
    (hi, lo)
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Horner's rule in double-double arithmetic.
fn eval_dd(coeffs: &[(f64, f64)], t: f64) -> f64 {
    let (mut h, mut l) = (0.0, 0.0);
    for &(ch, cl) in coeffs.iter().rev() {
        let (ph, pl) = two_prod(h, t);
        let pl = pl + l * t;
        let (sh, sl) = two_sum(ph, ch);
        let sl = sl + pl + cl;
        h = sh + sl;
        l = sl - (h - sh);
    }
    h + l
}

/// `d^m/dx^m exp(-1/(1-t^2))` with `t = (x - c)/r`.
pub fn bump_derivative(center: f64, radius: f64, m: usize, x: f64) -> f64 {
    let t = (x - center) / radius;
    if t.abs() >= 1.0 {
        return 0.0;
    }
    let u = (1.0 - t) * (1.0 + t);
    let envelope = (-1.0 / u - 2.0 * m as f64 * u.ln()).exp();
    if m == 0 {
        return envelope;
    }
    if envelope == 0.0 {
        return 0.0;
    }
    bump_polys_upto(m);
    let cache = BUMP_POLYS.read().expect("bump cache poisoned");
    radius.powi(-(m as i32)) * eval_dd(&cache[m], t) * envelope
}

/// Exact integer coefficients of `N_m`, ascending in `t`.
pub fn bump_numerator(m: usize) -> Vec<BigInt> {
    let mut n = vec![BigInt::from(1)];
    for j in 0..m {
        n = next_bump_poly(&n, j);
    }
    n
}
