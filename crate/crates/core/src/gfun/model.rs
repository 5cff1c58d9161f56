//! Pairings of the model distributions `x_+^a`, `x_-^a`, `delta^(n)` and the
//! finite parts `Pf(H(x)/x^k)`, `Pf(H(-x)/x^k)` with test functions.
//!
//! Every half-line pairing goes through one regularisation. For `a <= -1`
//! take the least `n` with `a + n + 1 > 0` and write
//!
//! ```text
//! Pf int_0^inf x^a phi = (-1)^n int_0^1 P_n(x) phi^(n)(x) dx + int_1^inf x^a phi
//!                        + sum_{j<n} phi^(j)(0)/j! w_j
//! ```
//!
//! where `P_n` is the `n`-fold primitive of `x^a` vanishing to order `n` at
//! `x = 1` and `w_j = 1/(a+j+1)`, or `0` at the one logarithmic index.

use serde::{Deserialize, Serialize};

use crate::comb::binomial;
use crate::error::{invalid, Result};
use crate::quad::{integrate_with_breaks, Endpoint, QuadOptions};
use num_traits::ToPrimitive;

use super::testfn::TestFunction;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "snake_case")]
pub enum ModelDistribution {
    /// `x_+^a`, `a > -1`.
    HomogeneousPlus(f64),
    /// `x_-^a = |x|^a H(-x)`, `a > -1`.
    HomogeneousMinus(f64),
    /// Analytic continuation of `x_+^a` to non-integer `a < -1`.
    ContinuedPlus(f64),
    ContinuedMinus(f64),
    Delta(usize),
    /// `Pf(H(x)/x^k)`.
    FinitePartPlus(usize),
    /// `Pf(H(-x)/x^k)`.
    FinitePartMinus(usize),
}

impl ModelDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::HomogeneousPlus(a) | Self::HomogeneousMinus(a) if !(a > -1.0) || !a.is_finite() => {
                Err(invalid("alpha", format!("homogeneous model needs alpha > -1, got {a}")))
            }
            Self::ContinuedPlus(a) | Self::ContinuedMinus(a) if !(a < -1.0) || a.fract() == 0.0 => Err(invalid(
                "alpha",
                format!("continued model needs non-integer alpha < -1, got {a}"),
            )),
            Self::FinitePartPlus(0) | Self::FinitePartMinus(0) => Err(invalid("k", "finite part needs k >= 1")),
            _ => Ok(()),
        }
    }

    /// Highest derivative of the test function the pairing touches.
    pub fn order_needed(&self) -> usize {
        match *self {
            Self::HomogeneousPlus(_) | Self::HomogeneousMinus(_) => 0,
            Self::ContinuedPlus(a) | Self::ContinuedMinus(a) => regularisation_order(a),
            Self::Delta(n) => n,
            Self::FinitePartPlus(k) | Self::FinitePartMinus(k) => k,
        }
    }

    pub fn pair(&self, phi: &TestFunction, tol: f64) -> Result<f64> {
        self.validate()?;
        phi.check_order(self.order_needed())?;
        match *self {
            Self::HomogeneousPlus(a) | Self::ContinuedPlus(a) => half_line(a, phi, tol),
            Self::HomogeneousMinus(a) | Self::ContinuedMinus(a) => half_line(a, &phi.reflect(), tol),
            Self::Delta(n) => {
                let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
                Ok(sign * phi.derivative(n, 0.0))
            }
            Self::FinitePartPlus(k) => half_line(-(k as f64), phi, tol),
            Self::FinitePartMinus(k) => {
                // H(-x)/x^k = (-1)^k H(-x)/|x|^k
                let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
                Ok(sign * half_line(-(k as f64), &phi.reflect(), tol)?)
            }
        }
    }
}

/// Finite linear combination `sum c_i d_i` of model distributions.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ModelCombination {
    pub parts: Vec<(f64, ModelDistribution)>,
}

impl ModelCombination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, coeff: f64, model: ModelDistribution) -> Self {
        self.parts.push((coeff, model));
        self
    }

    /// `c_- x_-^a + c_+ x_+^a`, continued past `a = -1` when needed.
    pub fn homogeneous(c_minus: f64, c_plus: f64, alpha: f64) -> Self {
        let (minus, plus) = if alpha > -1.0 {
            (
                ModelDistribution::HomogeneousMinus(alpha),
                ModelDistribution::HomogeneousPlus(alpha),
            )
        } else {
            (
                ModelDistribution::ContinuedMinus(alpha),
                ModelDistribution::ContinuedPlus(alpha),
            )
        };
        Self::new().with(c_minus, minus).with(c_plus, plus)
    }

    /// `gamma delta^(k-1) + beta x^-k`.
    pub fn negint(k: usize, gamma: f64, beta: f64) -> Self {
        Self::new()
            .with(gamma, ModelDistribution::Delta(k.saturating_sub(1)))
            .with(beta, ModelDistribution::FinitePartPlus(k))
            .with(beta, ModelDistribution::FinitePartMinus(k))
    }

    /// Terms with a zero coefficient are skipped, so they never fail.
    pub fn pair(&self, phi: &TestFunction, tol: f64) -> Result<f64> {
        let live: Vec<_> = self.parts.iter().filter(|(c, _)| *c != 0.0).collect();
        let each = tol / live.len().max(1) as f64;
        live.iter()
            .try_fold(0.0, |acc, (c, d)| Ok(acc + c * d.pair(phi, each)?))
    }
}

/// `<Pf x^-k, phi>` as the sum of both half-line finite parts.
pub fn pair_inverse_power(k: usize, phi: &TestFunction, tol: f64) -> Result<f64> {
    Ok(ModelDistribution::FinitePartPlus(k).pair(phi, tol / 2.0)?
        + ModelDistribution::FinitePartMinus(k).pair(phi, tol / 2.0)?)
}

fn regularisation_order(a: f64) -> usize {
    if a > -1.0 {
        0
    } else {
        (-a - 1.0).floor() as usize + 1
    }
}

fn is_integer(a: f64) -> bool {
    a.fract() == 0.0
}

/// `Pf int_0^inf x^a phi(x) dx` for any real `a`.
pub fn half_line(a: f64, phi: &TestFunction, tol: f64) -> Result<f64> {
    let (lo, hi) = phi.support();
    if hi <= 0.0 {
        return Ok(0.0);
    }
    let n = regularisation_order(a);
    phi.check_order(n)?;
    let opts = QuadOptions::abs(tol / 3.0);
    let left = lo.max(0.0);
    let zero_kind = |e: Endpoint| if lo < 0.0 { vec![(0.0, e)] } else { Vec::new() };
    if n == 0 {
        let sing = zero_kind(Endpoint::Power(a));
        return Ok(integrate_with_breaks(|x| x.powf(a) * phi.eval(x), left, hi, &[1.0], &sing, &opts)?.value);
    }
    let near_kind = if is_integer(a) {
        Endpoint::Log
    } else {
        Endpoint::Power(a + n as f64)
    };
    let sing = zero_kind(near_kind);
    let big_n = n - 1;
    let fact: f64 = (1..=big_n).map(|i| i as f64).product();
    let binoms: Vec<f64> = (0..=big_n)
        .map(|i| binomial(big_n as i64, i as i64).to_f64().expect("small binomial"))
        .collect();
    let p_n = |x: f64| -> f64 {
        let mut s = 0.0;
        for (i, c) in binoms.iter().enumerate() {
            let sign = if i % 2 == 1 { -1.0 } else { 1.0 };
            let e = a + i as f64 + 1.0;
            let t = if e == 0.0 {
                x.powi((big_n - i) as i32) * x.ln()
            } else {
                (x.powf(a + big_n as f64 + 1.0) - x.powi((big_n - i) as i32)) / e
            };
            s += sign * c * t;
        }
        s / fact
    };
    let sign_n = if n % 2 == 1 { -1.0 } else { 1.0 };
    let near = integrate_with_breaks(|x| p_n(x) * phi.derivative(n, x), left, hi.min(1.0), &[], &sing, &opts)?.value;
    let far = integrate_with_breaks(|x| x.powf(a) * phi.eval(x), left.max(1.0), hi, &[], &[], &opts)?.value;
    let mut taylor = 0.0;
    if lo < 0.0 {
        let mut jfact = 1.0;
        for j in 0..n {
            if j > 0 {
                jfact *= j as f64;
            }
            let e = a + j as f64 + 1.0;
            if e != 0.0 {
                taylor += phi.derivative(j, 0.0) / jfact / e;
            }
        }
    }
    Ok(sign_n * near + far + taylor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use approx::assert_abs_diff_eq;

    fn opts() -> QuadOptions {
        QuadOptions::abs(1e-13)
    }

    #[test]
    fn finite_part_k1_matches_log_identity() {
        // <Pf H/x, phi> = -int_0^inf log x phi'(x) dx
        for phi in [
            TestFunction::bump(0.5, 1.0).unwrap(),
            TestFunction::bump(0.0, 2.0).unwrap(),
        ] {
            let (_, hi) = phi.support();
            let sing = [(0.0, Endpoint::Log)];
            let oracle = -integrate_with_breaks(|x| x.ln() * phi.derivative(1, x), 0.0, hi, &[], &sing, &opts())
                .unwrap()
                .value;
            let got = ModelDistribution::FinitePartPlus(1).pair(&phi, 1e-12).unwrap();
            assert_abs_diff_eq!(got, oracle, epsilon = 1e-11);
        }
    }

    #[test]
    fn finite_part_k2_matches_double_log_identity() {
        // <Pf H/x^2, phi> = -int_0^inf (log x + 1) phi''(x) dx, by parts twice
        let phi = TestFunction::bump(0.3, 1.0).unwrap();
        let sing = [(0.0, Endpoint::Log)];
        let oracle = -integrate_with_breaks(|x| (x.ln() + 1.0) * phi.derivative(2, x), 0.0, 1.3, &[], &sing, &opts())
            .unwrap()
            .value;
        let got = ModelDistribution::FinitePartPlus(2).pair(&phi, 1e-12).unwrap();
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-10);
    }

    #[test]
    fn continued_power_matches_primitive() {
        // x_+^-1.5 = -2 (x_+^-0.5)', so the pairing is 2 int_0^inf x^-0.5 phi'
        let phi = TestFunction::bump(0.2, 1.0).unwrap();
        let sing = [(0.0, Endpoint::Power(-0.5))];
        let oracle = 2.0
            * integrate_with_breaks(|x| x.powf(-0.5) * phi.derivative(1, x), 0.0, 1.2, &[], &sing, &opts())
                .unwrap()
                .value;
        let got = ModelDistribution::ContinuedPlus(-1.5).pair(&phi, 1e-12).unwrap();
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-11);
    }

    #[test]
    fn homogeneous_uses_plain_integral() {
        let phi = TestFunction::bump(0.0, 1.0).unwrap();
        let got = ModelDistribution::HomogeneousPlus(0.0).pair(&phi, 1e-12).unwrap();
        let whole = integrate(|x| phi.eval(x), -1.0, 1.0, &opts()).unwrap().value;
        assert_abs_diff_eq!(got, whole / 2.0, epsilon = 1e-12);
        let minus = ModelDistribution::HomogeneousMinus(0.0).pair(&phi, 1e-12).unwrap();
        assert_abs_diff_eq!(minus, got, epsilon = 1e-12);
    }

    #[test]
    fn delta_pairing() {
        let phi = TestFunction::bump(0.2, 1.0).unwrap();
        assert_eq!(
            ModelDistribution::Delta(1).pair(&phi, 1e-12).unwrap(),
            -phi.derivative(1, 0.0)
        );
        assert!(ModelDistribution::FinitePartPlus(0).pair(&phi, 1e-12).is_err());
        assert!(ModelDistribution::ContinuedPlus(-2.0).pair(&phi, 1e-12).is_err());
    }

    #[test]
    fn odd_finite_part_of_even_function_vanishes() {
        let phi = TestFunction::bump(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(pair_inverse_power(1, &phi, 1e-12).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pair_inverse_power(3, &phi, 1e-12).unwrap(), 0.0, epsilon = 1e-11);
    }
}
