//! Exact combinatorics: Stirling numbers of the second kind, the Bell
//! polynomial closed form at factorial arguments, the coefficients of the
//! reciprocal substitution `x^-2 phi(1/x)`, and the exponential-substitution
//! derivative identity. Everything here is exact; no floating point enters
//! except in [`ln_stirling2`], which is a read-out helper for callers.

mod laurent;
pub mod oracle;

use std::f64::consts::LN_2;
use std::sync::RwLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};

pub use laurent::LaurentPoly;

/// Arbitrary precision signed integer.
pub type ExactInt = BigInt;

/// Lower-triangular memo of `S(n, k)`, grown on demand and then read
/// concurrently.
static STIRLING: RwLock<Vec<Vec<BigUint>>> = RwLock::new(Vec::new());

fn ensure_rows(n: usize) {
    {
        let rows = STIRLING.read().expect("stirling table poisoned");
        if rows.len() > n {
            return;
        }
    }
    let mut rows = STIRLING.write().expect("stirling table poisoned");
    if rows.is_empty() {
        rows.push(vec![BigUint::one()]);
    }
    while rows.len() <= n {
        let prev = rows.last().expect("non-empty");
        let row_n = prev.len();
        let mut row = vec![BigUint::zero(); row_n + 1];
        for k in 1..=row_n {
            let same = if k < prev.len() {
                &prev[k] * BigUint::from(k)
            } else {
                BigUint::zero()
            };
            row[k] = same + &prev[k - 1];
        }
        rows.push(row);
    }
}

fn with_stirling<T>(n: usize, k: usize, f: impl FnOnce(&BigUint) -> T) -> T {
    ensure_rows(n);
    let rows = STIRLING.read().expect("stirling table poisoned");
    match rows[n].get(k) {
        Some(v) => f(v),
        None => f(&BigUint::zero()),
    }
}

/// Stirling number of the second kind `S(n, k)`.
pub fn stirling2(n: usize, k: usize) -> ExactInt {
    with_stirling(n, k, |v| BigInt::from(v.clone()))
}

/// Natural logarithm of `S(n, k)` (`-inf` when it vanishes), without
/// materialising the value as an `f64`.
pub fn ln_stirling2(n: usize, k: usize) -> f64 {
    with_stirling(n, k, ln_biguint)
}

pub(crate) fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 960 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64 bits");
    top.ln() + shift as f64 * LN_2
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Binomial coefficient with the convention `C(n, k) = 0` outside `0 <= k <= n`
/// (in particular `C(k-1, -1) = 0` for `k >= 1`).
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Checks `S(k+1, p+1) <= 2^(k+1) (p+1)^(k-p)` and the chained
/// `S(k+1, p+1) <= 2^(k+1) k!/p!` for all `0 <= p <= k <= k_max`, exactly.
pub fn stirling2_bound_check(k_max: usize) -> bool {
    first_stirling_bound_violation(k_max).is_none()
}

/// The first `(k, p)` violating either bound, if any.
pub fn first_stirling_bound_violation(k_max: usize) -> Option<(usize, usize)> {
    for k in 0..=k_max {
        let two_pow = BigInt::one() << (k + 1);
        for p in 0..=k {
            let s = stirling2(k + 1, p + 1);
            let power_bound = &two_pow * num_traits::pow(BigInt::from(p + 1), k - p);
            // k!/p! = (p+1)(p+2)...k
            let falling = ((p + 1)..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
            let fact_bound = &two_pow * falling;
            if s > power_bound || s > fact_bound {
                return Some((k, p));
            }
        }
    }
    None
}

/// `B_{k,j}(1!, 2!, ..., (k-j+1)!) = k!(k-1)! / (j!(j-1)!(k-j)!)`.
pub fn bell_factorial(k: usize, j: usize) -> Result<ExactInt> {
    if j == 0 || j > k {
        return Err(invalid("j", format!("need 1 <= j <= k, got j = {j}, k = {k}")));
    }
    let num = factorial(k) * factorial(k - 1);
    let den = factorial(j) * factorial(j - 1) * factorial(k - j);
    Ok(num / den)
}

/// Coefficient `c_{m,j}` in
/// `d^m/dx^m (x^-2 phi(1/x)) = sum_j c_{m,j} phi^(j)(1/x) / x^(m+j+2)`.
///
/// Panics if the result violates `|c_{m,j}| <= (m!/j!) 4^m`; that bound is
/// a theorem, so a violation means the formula was implemented wrongly.
pub fn recip_coeff(m: usize, j: usize) -> Result<ExactInt> {
    if j > m {
        return Err(invalid("j", format!("need 0 <= j <= m, got j = {j}, m = {m}")));
    }
    let sign = if m.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    let value = if j == 0 {
        sign * factorial(m + 1)
    } else {
        let mut sum = BigInt::zero();
        for k in j..=m {
            sum += BigInt::from(m - k + 1) * binomial(k as i64 - 1, j as i64 - 1);
        }
        sign * (factorial(m) / factorial(j)) * sum
    };
    let bound = (factorial(m) / factorial(j)) * (BigInt::one() << (2 * m));
    assert!(
        value.abs() <= bound,
        "c_({m},{j}) = {value} exceeds (m!/j!) 4^m = {bound}"
    );
    Ok(value)
}

/// Both sides of the reciprocal-substitution identity for `phi(y) = y^j0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecipIdentity {
    pub m: usize,
    pub j0: usize,
    /// `d^m/dx^m x^(-2-j0)`, by repeated formal differentiation.
    pub lhs: LaurentPoly,
    /// `sum_j c_{m,j} (j0!/(j0-j)!) x^(-m-j0-2)`.
    pub rhs: LaurentPoly,
}

impl RecipIdentity {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn recip_derivative_oracle(m: usize, j0: usize) -> Result<RecipIdentity> {
    let mut lhs = LaurentPoly::monomial(-2 - j0 as i64, BigRational::one());
    for _ in 0..m {
        lhs = lhs.derivative();
    }
    let mut rhs = LaurentPoly::zero();
    let exponent = -(m as i64) - j0 as i64 - 2;
    for j in 0..=m.min(j0) {
        let falling = factorial(j0) / factorial(j0 - j);
        rhs.add_term(exponent, BigRational::from_integer(recip_coeff(m, j)? * falling));
    }
    Ok(RecipIdentity { m, j0, lhs, rhs })
}

/// `phi(y) = sum a_i y^i` as an `E`-polynomial of its `m`-th derivative
/// evaluated at `E`.
fn poly_derivative_in_e(coeffs: &[BigRational], m: usize) -> LaurentPoly {
    let mut out = LaurentPoly::zero();
    for (i, a) in coeffs.iter().enumerate() {
        if i < m {
            continue;
        }
        let falling = factorial(i) / factorial(i - m);
        out.add_term((i - m) as i64, a * BigRational::from_integer(falling));
    }
    out
}

/// Both sides of
/// `psi^(n)(x) = e^x sum_{m<=n} S(n+1, m+1) e^(mx) phi^(m)(e^x)` with
/// `psi(x) = e^x phi(e^x)`, written as polynomials in `E = e^x`.
pub fn exp_chain_identity(n: usize, phi: &[BigRational]) -> (LaurentPoly, LaurentPoly) {
    let mut lhs = poly_derivative_in_e(phi, 0).shift(1);
    for _ in 0..n {
        lhs = lhs.euler_derivative();
    }
    let mut rhs = LaurentPoly::zero();
    for m in 0..=n {
        let s = BigRational::from_integer(stirling2(n + 1, m + 1));
        let term = poly_derivative_in_e(phi, m).shift(m as i64 + 1).scale(&s);
        rhs = &rhs + &term;
    }
    (lhs, rhs)
}

/// Exhaustive check of the exponential-substitution identity for every
/// `n <= n_max` over the monomial basis `y^0..y^d` and one mixed polynomial.
pub fn exp_chain_check(n_max: usize, d: usize) -> bool {
    let mut polys: Vec<Vec<BigRational>> = (0..=d)
        .map(|i| {
            let mut c = vec![BigRational::zero(); d + 1];
            c[i] = BigRational::one();
            c
        })
        .collect();
    polys.push(
        (0..=d)
            .map(|i| BigRational::new(BigInt::from(2 * i as i64 - 3), BigInt::from(i as i64 + 1)))
            .collect(),
    );
    polys.iter().all(|phi| {
        (0..=n_max).all(|n| {
            let (lhs, rhs) = exp_chain_identity(n, phi);
            lhs == rhs
        })
    })
}

/// One row of the combinatorial identity suite.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Runs every exact identity at the given size.
///
/// `m_max` drives the reciprocal coefficients (identity up to `m_max`, bound up
/// to `max(20, m_max)`); the remaining checks use the fixed sizes below.
pub fn verify_suite(m_max: usize) -> Vec<IdentityCheck> {
    let mut out = Vec::new();

    let j0_max = 8;
    let mut failures = Vec::new();
    for m in 0..=m_max {
        for j0 in 0..=j0_max {
            match recip_derivative_oracle(m, j0) {
                Ok(id) if id.holds() => {}
                _ => failures.push((m, j0)),
            }
        }
    }
    out.push(IdentityCheck {
        name: format!("recip_coeff vs Laurent differentiation (m<={m_max}, j0<={j0_max})"),
        passed: failures.is_empty(),
        detail: format!("{} mismatches {:?}", failures.len(), failures),
    });

    let mut failures = Vec::new();
    for m in 0..=m_max {
        for j0 in 0..=12usize {
            let mut lhs = BigInt::zero();
            for j in 0..=m.min(j0) {
                lhs += recip_coeff(m, j).expect("in range") * (factorial(j0) / factorial(j0 - j));
            }
            let sign = if m % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            let rhs = sign * factorial(m + 1 + j0) / factorial(j0 + 1);
            if lhs != rhs {
                failures.push((m, j0));
            }
        }
    }
    out.push(IdentityCheck {
        name: format!("monomial identity (m<={m_max}, j0<=12)"),
        passed: failures.is_empty(),
        detail: format!("{} mismatches {:?}", failures.len(), failures),
    });

    let bound_m = m_max.max(20);
    // recip_coeff asserts the bound itself; reaching the end means it held.
    let bound_ok = std::panic::catch_unwind(|| {
        for m in 0..=bound_m {
            for j in 0..=m {
                let _ = recip_coeff(m, j);
            }
        }
    })
    .is_ok();
    out.push(IdentityCheck {
        name: format!("|c_(m,j)| <= (m!/j!) 4^m (m<={bound_m})"),
        passed: bound_ok,
        detail: String::new(),
    });

    let mut failures = Vec::new();
    for k in 1..=15 {
        for j in 1..=k {
            let closed = bell_factorial(k, j).expect("in range");
            if closed != oracle::bell_factorial_series(k, j) || closed != oracle::bell_factorial_recurrence(k, j) {
                failures.push((k, j));
            }
        }
    }
    out.push(IdentityCheck {
        name: "bell_factorial vs generating function and recurrence (k<=15)".into(),
        passed: failures.is_empty(),
        detail: format!("{} mismatches {:?}", failures.len(), failures),
    });

    let mut failures = Vec::new();
    for n in 0..=10 {
        for k in 0..=n {
            if stirling2(n, k) != BigInt::from(oracle::count_set_partitions(n, k)) {
                failures.push((n, k));
            }
        }
    }
    out.push(IdentityCheck {
        name: "stirling2 vs set-partition enumeration (n<=10)".into(),
        passed: failures.is_empty(),
        detail: format!("{} mismatches {:?}", failures.len(), failures),
    });

    let violation = first_stirling_bound_violation(30);
    out.push(IdentityCheck {
        name: "S(k+1,p+1) <= 2^(k+1)(p+1)^(k-p) <= 2^(k+1)k!/p! (k<=30)".into(),
        passed: violation.is_none(),
        detail: violation.map(|v| format!("violated at {v:?}")).unwrap_or_default(),
    });

    out.push(IdentityCheck {
        name: "exponential substitution chain rule (n<=10, deg<=4)".into(),
        passed: exp_chain_check(10, 4),
        detail: String::new(),
    });

    out
}
