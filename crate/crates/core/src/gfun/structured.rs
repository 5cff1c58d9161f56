//! Distributions given in structural form
//! `f = sum_m f_m^(m) + sum_n a_n delta^(n)` with locally integrable
//! coefficient functions `f_m`.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quad::{integrate_with_breaks, Endpoint, QuadOptions};
use crate::svf::{Locus, SlowlyVaryingFn};

use super::testfn::{bump_derivative, TestFunction};

/// Radial cutoff applied to `|y|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "radius", rename_all = "snake_case")]
pub enum Cut {
    None,
    /// 0 on `|y| <= r`, 1 on `|y| >= 2r`, smooth in between.
    SmoothInner(f64),
    /// `H(|y| - r)`.
    SharpInner(f64),
    /// 1 on `|y| <= r`, 0 on `|y| >= 2r`, smooth in between.
    SmoothOuter(f64),
    /// `H(r - |y|)`.
    SharpOuter(f64),
}

/// `h(s-1) / (h(s-1) + h(2-s))` with `h(u) = exp(-1/u)`: 0 below 1, 1 above 2.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 1.0 {
        return 0.0;
    }
    if s >= 2.0 {
        return 1.0;
    }
    let h = |u: f64| (-1.0 / u).exp();
    let (a, b) = (h(s - 1.0), h(2.0 - s));
    a / (a + b)
}

impl Cut {
    pub fn factor(&self, y: f64) -> f64 {
        let y = y.abs();
        match *self {
            Cut::None => 1.0,
            Cut::SmoothInner(r) => smooth_step(y / r),
            Cut::SharpInner(r) => f64::from(u8::from(y >= r)),
            Cut::SmoothOuter(r) => 1.0 - smooth_step(y / r),
            Cut::SharpOuter(r) => f64::from(u8::from(y <= r)),
        }
    }

    fn radius(&self) -> Option<f64> {
        match *self {
            Cut::None => None,
            Cut::SmoothInner(r) | Cut::SharpInner(r) | Cut::SmoothOuter(r) | Cut::SharpOuter(r) => Some(r),
        }
    }

    /// Radii where the factor is not smooth.
    fn kinks(&self) -> Vec<f64> {
        match *self {
            Cut::None => Vec::new(),
            Cut::SmoothInner(r) | Cut::SmoothOuter(r) => vec![r, 2.0 * r],
            Cut::SharpInner(r) | Cut::SharpOuter(r) => vec![r],
        }
    }

    pub fn vanishes_near_zero(&self) -> bool {
        matches!(self, Cut::SmoothInner(_) | Cut::SharpInner(_))
    }

    /// Radius outside which the factor is 0.
    pub fn reach(&self) -> f64 {
        match *self {
            Cut::SmoothOuter(r) => 2.0 * r,
            Cut::SharpOuter(r) => r,
            _ => f64::INFINITY,
        }
    }
}

/// One coefficient function `f_m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoeffFn {
    /// `c_plus y^p L(y)` for `y > 0` and `left_sign c_minus |y|^p L(|y|)` for
    /// `y < 0`, times the cutoff.
    Power {
        c_plus: f64,
        c_minus: f64,
        power: f64,
        left_sign: f64,
        svf: SlowlyVaryingFn,
        cut: Cut,
    },
    /// Polynomial on a closed interval, 0 outside.
    Poly {
        coeffs: Vec<f64>,
        support: (f64, f64),
    },
    Bump {
        amplitude: f64,
        center: f64,
        radius: f64,
    },
    /// `c1 H(y) L(|y|) + c2 G(|y|)` with `G(y) = int_1^y L(t)/t dt`.
    OriginPrimitive {
        c1: f64,
        c2: f64,
        svf: SlowlyVaryingFn,
    },
}

impl CoeffFn {
    /// Coefficient of order `m` in the non-integer case: `f_m(y)` behaves
    /// like `c_pm |y|^(alpha+m) L(|y|)` after dividing by `y^m |y|^alpha`.
    pub fn power_noninteger(c_plus: f64, c_minus: f64, alpha: f64, m: usize, svf: SlowlyVaryingFn, cut: Cut) -> Self {
        CoeffFn::Power {
            c_plus,
            c_minus,
            power: alpha + m as f64,
            left_sign: parity(m),
            svf,
            cut,
        }
    }

    /// Coefficient of order `m` in the integer case `alpha = -k`:
    /// `f_m(y) / (y^(m-k) L(|y|)) -> c_pm`.
    pub fn power_negint(c_plus: f64, c_minus: f64, k: usize, m: usize, svf: SlowlyVaryingFn, cut: Cut) -> Self {
        let e = m as i64 - k as i64;
        CoeffFn::Power {
            c_plus,
            c_minus,
            power: e as f64,
            left_sign: parity(e.unsigned_abs() as usize),
            svf,
            cut,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CoeffFn::Power { power, cut, .. } => {
                if !power.is_finite() {
                    return Err(invalid("power", "must be finite"));
                }
                if *power <= -1.0 && !cut.vanishes_near_zero() {
                    return Err(invalid(
                        "cut",
                        format!("|y|^{power} is not integrable at 0; add an inner cutoff"),
                    ));
                }
                if let Some(r) = cut.radius() {
                    if !(r > 0.0) {
                        return Err(invalid("cut", format!("cutoff radius must be positive, got {r}")));
                    }
                }
                Ok(())
            }
            CoeffFn::Poly { support, .. } if !(support.1 >= support.0) => {
                Err(invalid("support", "polynomial support must be an interval"))
            }
            CoeffFn::Bump { radius, .. } if !(*radius > 0.0) => Err(invalid("radius", "bump radius must be positive")),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            CoeffFn::Power {
                c_plus,
                c_minus,
                power,
                left_sign,
                svf,
                cut,
            } => {
                if y == 0.0 {
                    return 0.0;
                }
                let (c, s) = if y > 0.0 {
                    (*c_plus, 1.0)
                } else {
                    (*c_minus, *left_sign)
                };
                if c == 0.0 {
                    return 0.0;
                }
                let k = cut.factor(y);
                if k == 0.0 {
                    return 0.0;
                }
                let a = y.abs();
                s * c * k * a.powf(*power) * svf.value(a)
            }
            CoeffFn::Poly { coeffs, support } => {
                if y < support.0 || y > support.1 {
                    0.0
                } else {
                    coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
                }
            }
            CoeffFn::Bump {
                amplitude,
                center,
                radius,
            } => amplitude * bump_derivative(*center, *radius, 0, y),
            CoeffFn::OriginPrimitive { c1, c2, svf } => {
                if y == 0.0 {
                    return 0.0;
                }
                let a = y.abs();
                let mut v = 0.0;
                if *c2 != 0.0 {
                    let g = if a < 1.0 {
                        svf.log_primitive(a, 1.0).map(|v| -v)
                    } else {
                        svf.log_primitive(1.0, a)
                    };
                    v += c2 * g.unwrap_or(f64::NAN);
                }
                if y > 0.0 {
                    v += c1 * svf.value(a);
                }
                v
            }
        }
    }

    /// Intervals outside which the function vanishes, possibly unbounded.
    /// A power term with an inner cutoff has one ray on each active side.
    pub fn active_ranges(&self) -> Vec<(f64, f64)> {
        match self {
            CoeffFn::Power {
                c_plus, c_minus, cut, ..
            } => {
                let outer = cut.reach();
                let inner = if cut.vanishes_near_zero() {
                    cut.radius().unwrap_or(0.0)
                } else {
                    0.0
                };
                let mut out = Vec::new();
                if *c_minus != 0.0 {
                    out.push((-outer, -inner));
                }
                if *c_plus != 0.0 {
                    out.push((inner, outer));
                }
                out
            }
            CoeffFn::Poly { support, .. } => vec![*support],
            CoeffFn::Bump { center, radius, .. } => vec![(center - radius, center + radius)],
            CoeffFn::OriginPrimitive { .. } => vec![(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    /// Points where the function is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut both_sides = |r: f64| {
            out.push(r);
            out.push(-r);
        };
        match self {
            CoeffFn::Power { svf, cut, .. } => {
                for r in cut.kinks() {
                    both_sides(r);
                }
                if !svf.is_constant() {
                    both_sides(svf.domain_floor());
                }
                out.push(0.0);
            }
            CoeffFn::Poly { support, .. } => out.extend([support.0, support.1]),
            CoeffFn::Bump { center, radius, .. } => out.extend([center - radius, center + radius]),
            CoeffFn::OriginPrimitive { svf, .. } => {
                both_sides(1.0);
                if !svf.is_constant() {
                    both_sides(svf.domain_floor());
                }
                out.push(0.0);
            }
        }
        out
    }

    /// Behaviour at `y = 0`, where integrands need a graded mesh.
    pub fn singularity_at_zero(&self) -> Option<Endpoint> {
        match self {
            CoeffFn::Power { power, svf, cut, .. } => {
                if cut.vanishes_near_zero() {
                    None
                } else if !svf.is_constant() && svf.locus() == Locus::Origin {
                    Some(if *power == 0.0 {
                        Endpoint::Log
                    } else {
                        Endpoint::Power(*power)
                    })
                } else if power.fract() == 0.0 && *power >= 0.0 {
                    None
                } else {
                    Some(Endpoint::Power(*power))
                }
            }
            CoeffFn::OriginPrimitive { c2, svf, .. } => (*c2 != 0.0 || !svf.is_constant()).then_some(Endpoint::Log),
            _ => None,
        }
    }
}

fn parity(n: usize) -> f64 {
    if n % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub order: usize,
    pub coeff: CoeffFn,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointTerm {
    pub order: usize,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructuredUD {
    pub locus: Locus,
    pub terms: Vec<Term>,
    pub points: Vec<PointTerm>,
}

impl StructuredUD {
    pub fn new(locus: Locus) -> Self {
        Self {
            locus,
            terms: Vec::new(),
            points: Vec::new(),
        }
    }

    pub fn with_term(mut self, order: usize, coeff: CoeffFn) -> Self {
        self.terms.push(Term { order, coeff });
        self
    }

    pub fn with_point(mut self, order: usize, amplitude: f64) -> Self {
        self.points.push(PointTerm { order, amplitude });
        self
    }

    /// Highest derivative order that appears, i.e. the test-function order
    /// every pairing needs.
    pub fn max_order(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.order)
            .chain(self.points.iter().map(|p| p.order))
            .max()
            .unwrap_or(0)
    }

    /// An empty structure is the zero distribution and is valid.
    pub fn validate(&self) -> Result<()> {
        self.terms.iter().try_for_each(|t| t.coeff.validate())
    }

    /// Distributional derivative: every order goes up by one.
    pub fn differentiate(&self) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.order += 1);
        out.points.iter_mut().for_each(|p| p.order += 1);
        out
    }

    /// Checks `|f_m(y)| <= C l^m / M_m (1+|y|)^(alpha+m) L(|y|)` on `grid`,
    /// where `log_m(m)` supplies `log M_m`. Returns the worst ratio of the
    /// two sides.
    pub fn growth_bound_ratio(
        &self,
        c: f64,
        ell: f64,
        log_m: impl Fn(usize) -> f64,
        alpha: f64,
        l: &SlowlyVaryingFn,
        grid: &[f64],
    ) -> f64 {
        let mut worst: f64 = 0.0;
        for term in &self.terms {
            let m = term.order;
            for &y in grid {
                let a = y.abs();
                let ln_bound = c.ln() + m as f64 * ell.ln() - log_m(m)
                    + (alpha + m as f64) * (1.0 + a).ln()
                    + l.value(a.max(f64::MIN_POSITIVE)).abs().ln();
                let v = term.coeff.eval(y).abs();
                if v > 0.0 {
                    worst = worst.max((v.ln() - ln_bound).exp());
                }
            }
        }
        worst
    }
}

/// `<f, phi>`.
pub fn pair_structured(f: &StructuredUD, phi: &TestFunction, tol: f64) -> Result<f64> {
    dilate_pair(f, 1.0, phi, tol)
}

/// `<f(scale x), phi(x)> = sum_m (-1)^m scale^-m int f_m(scale x) phi^(m)(x) dx
///                        + sum_n a_n (-1)^n scale^(-1-n) phi^(n)(0)`.
///
/// Each integral is taken over the intersection of the supports and is
/// exactly 0 when they are disjoint.
pub fn dilate_pair(f: &StructuredUD, scale: f64, phi: &TestFunction, tol: f64) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(invalid(
            "scale",
            format!("dilation needs a positive finite scale, got {scale}"),
        ));
    }
    f.validate()?;
    phi.check_order(f.max_order())?;
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: tol,
        ..QuadOptions::default()
    };
    let (pa, pb) = phi.support();
    let mut total = 0.0;
    for term in &f.terms {
        let breaks: Vec<f64> = term.coeff.breakpoints().into_iter().map(|y| y / scale).collect();
        let sing: Vec<(f64, Endpoint)> = term.coeff.singularity_at_zero().map(|e| (0.0, e)).into_iter().collect();
        let m = term.order;
        let mut integral = 0.0;
        for (sa, sb) in term.coeff.active_ranges() {
            let (a, b) = (pa.max(sa / scale), pb.min(sb / scale));
            if !(b > a) {
                continue;
            }
            integral += integrate_with_breaks(
                |x| {
                    let d = phi.derivative(m, x);
                    if d == 0.0 {
                        0.0
                    } else {
                        term.coeff.eval(scale * x) * d
                    }
                },
                a,
                b,
                &breaks,
                &sing,
                &opts,
            )?
            .value;
        }
        total += parity(m) * scale.powi(-(m as i32)) * integral;
    }
    for p in &f.points {
        total += p.amplitude * parity(p.order) * scale.powi(-1 - p.order as i32) * phi.derivative(p.order, 0.0);
    }
    Ok(total)
}
