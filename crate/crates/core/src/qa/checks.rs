//! Expansion, extension and locality checks along dilation ladders.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gfun::{
    dilate_pair, zspace_norm, CoeffFn, ModelCombination, ModelDistribution, StructuredUD, TestFunction, ZNorm,
};
use crate::svf::{dehaan_check, DeHaanReport, Locus, SlowlyVaryingFn};
use crate::weights::WeightSequence;

use super::constants::integrate_coeff;
use super::ladder::{decay_exponent, extrapolate, quasi_limit, ratio_ladder, Ladder, LimitEstimate, Method};

/// `f` with every term order and point order lowered by `n`: a primitive of
/// order `n`, of degree `alpha + n` when `f` has degree `alpha`.
pub fn primitive_shift(f: &StructuredUD, n: usize) -> Result<StructuredUD> {
    let low = f
        .terms
        .iter()
        .map(|t| t.order)
        .chain(f.points.iter().map(|p| p.order))
        .min()
        .unwrap_or(n);
    if low < n {
        return Err(invalid(
            "n",
            format!("a term of order {low} has no {n}-fold primitive in structural form"),
        ));
    }
    let mut out = f.clone();
    out.terms.iter_mut().for_each(|t| t.order -= n);
    out.points.iter_mut().for_each(|p| p.order -= n);
    Ok(out)
}

/// Structured derivative; lowers the degree by one.
pub fn differentiate(f: &StructuredUD) -> StructuredUD {
    f.differentiate()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualPoint {
    pub scale: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NegIntExpansionReport {
    pub c0_plus: f64,
    pub c0_minus: f64,
    /// `F(s) - F(-s)` with `F(x) = int_0^x f0`.
    pub jumps: Vec<f64>,
    pub points: Vec<ResidualPoint>,
    pub extrapolated: f64,
    pub decay_exponent: Option<f64>,
    pub tol: f64,
    pub converged: bool,
}

/// Residual of
/// `f0(s x) = (F(s) - F(-s))/s delta + (L(s)/s)(c0- Pf(H(-x)/x) + c0+ Pf(H(x)/x)) + o(L(s)/s)`
/// scaled by `s / L(s)`.
#[allow(clippy::too_many_arguments)]
pub fn negint_expansion_check(
    f0: &CoeffFn,
    l: &SlowlyVaryingFn,
    c0_plus: f64,
    c0_minus: f64,
    phi: &TestFunction,
    ladder: &Ladder,
    method: Method,
    tol: f64,
) -> Result<NegIntExpansionReport> {
    ladder.validate()?;
    if ladder.locus() != Locus::Infinity || l.locus() != Locus::Infinity {
        return Err(Error::Inconsistent(
            "the negative-integer expansion runs at infinity".into(),
        ));
    }
    let f = StructuredUD::new(Locus::Infinity).with_term(0, f0.clone());
    let model = ModelCombination::new()
        .with(c0_minus, ModelDistribution::FinitePartMinus(1))
        .with(c0_plus, ModelDistribution::FinitePartPlus(1));
    let limit = model.pair(phi, tol)?;
    let phi0 = phi.eval(0.0);
    let scales = ladder.scales();
    let rows: Vec<(f64, f64)> = scales
        .par_iter()
        .map(|&s| {
            let jump = integrate_coeff(f0, -s, s, tol * 1e-3)?;
            let pairing = dilate_pair(&f, s, phi, tol * 1e-3)?;
            let r = s / l.value(s) * (pairing - jump / s * phi0) - limit;
            Ok((jump, r))
        })
        .collect::<Result<_>>()?;
    let points: Vec<ResidualPoint> = scales
        .iter()
        .zip(&rows)
        .map(|(&scale, &(_, residual))| ResidualPoint { scale, residual })
        .collect();
    let ladder_pts: Vec<_> = points
        .iter()
        .map(|p| super::ladder::LadderPoint {
            scale: p.scale,
            ratio: p.residual,
        })
        .collect();
    let extrapolated = extrapolate(&ladder_pts, method)?.value;
    let residuals: Vec<f64> = points.iter().map(|p| p.residual).collect();
    Ok(NegIntExpansionReport {
        c0_plus,
        c0_minus,
        jumps: rows.iter().map(|r| r.0).collect(),
        decay_exponent: decay_exponent(&scales, &residuals),
        converged: extrapolated.abs() <= tol && points.last().is_some_and(|p| p.residual.abs() <= tol.sqrt()),
        extrapolated,
        points,
        tol,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExtensionKind {
    /// `alpha > -1`: the limit is `c x_+^alpha` with no correction.
    NonIntegerPositive,
    /// `-(N+1) < alpha < -N`, with the supplied `a_0, ..., a_{N-1}`.
    NonIntegerNegative { a: Vec<f64> },
    /// `alpha = -1`: `b(s)/s delta + c L(s)/s Pf(H/x) + a_0 delta / s`.
    NegInt { a0: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtensionItem {
    pub points: Vec<ResidualPoint>,
    pub decay_exponent: Option<f64>,
    pub last_abs_residual: f64,
    /// Leading-order estimate of `a_0` from the top of the ladder, when
    /// `N = 1`.
    pub recovered_a0: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtensionReport {
    pub alpha: f64,
    pub c: f64,
    pub items: Vec<ExtensionItem>,
    /// `b(s) = int_1^s f0` along the ladder, for `alpha = -1`.
    pub b_values: Option<Vec<f64>>,
    pub dehaan: Option<DeHaanReport>,
    pub passed: bool,
}

/// Checks the expansion of an `f` supported in `[0, inf)` whose restriction
/// to `(0, inf)` behaves like `c s^alpha L(s) x^alpha`.
#[allow(clippy::too_many_arguments)]
pub fn extension_expansion(
    f: &StructuredUD,
    kind: &ExtensionKind,
    alpha: f64,
    c: f64,
    l: &SlowlyVaryingFn,
    phis: &[TestFunction],
    ladder: &Ladder,
    tol: f64,
) -> Result<ExtensionReport> {
    ladder.validate()?;
    if f.locus != Locus::Infinity || ladder.locus() != Locus::Infinity {
        return Err(Error::Inconsistent(
            "extension at infinity needs an infinity ladder".into(),
        ));
    }
    if f.terms
        .iter()
        .any(|t| t.coeff.active_ranges().iter().any(|r| r.0 < 0.0))
    {
        return Err(invalid("f", "extension checks need f supported in [0, inf)"));
    }
    let scales = ladder.scales();
    let mut report = ExtensionReport {
        alpha,
        c,
        items: Vec::new(),
        b_values: None,
        dehaan: None,
        passed: true,
    };
    let b_fn = |s: f64| -> Result<f64> {
        f.terms
            .iter()
            .filter(|t| t.order == 0)
            .map(|t| {
                if s >= 1.0 {
                    integrate_coeff(&t.coeff, 1.0, s, tol * 1e-3)
                } else {
                    integrate_coeff(&t.coeff, s, 1.0, tol * 1e-3).map(|v| -v)
                }
            })
            .sum()
    };
    let (corrections, limit): (Vec<f64>, ModelCombination) = match kind {
        ExtensionKind::NonIntegerPositive => {
            if !(alpha > -1.0) {
                return Err(invalid("alpha", "case (i) needs alpha > -1"));
            }
            (
                Vec::new(),
                ModelCombination::new().with(c, ModelDistribution::HomogeneousPlus(alpha)),
            )
        }
        ExtensionKind::NonIntegerNegative { a } => {
            let n = (-alpha - 1.0).floor() as usize + 1;
            if alpha >= -1.0 || alpha.fract() == 0.0 || a.len() != n {
                return Err(invalid(
                    "a",
                    format!(
                        "case (ii) at alpha = {alpha} needs non-integer alpha < -1 and {n} constants, got {}",
                        a.len()
                    ),
                ));
            }
            (
                a.clone(),
                ModelCombination::new().with(c, ModelDistribution::ContinuedPlus(alpha)),
            )
        }
        ExtensionKind::NegInt { a0 } => {
            if alpha != -1.0 || f.max_order() != 0 {
                return Err(invalid(
                    "alpha",
                    "case (iii) is implemented for alpha = -1 with order-0 terms; lower higher k with primitive_shift",
                ));
            }
            let b_values = scales.iter().map(|&s| b_fn(s)).collect::<Result<Vec<f64>>>()?;
            report.b_values = Some(b_values);
            let b_interp = |x: f64| b_fn(x).unwrap_or(f64::NAN);
            let dh = dehaan_check(&b_interp, l, c, 1, &[0.5, 2.0, 10.0], &scales[scales.len() / 2..], 1e-2)?;
            report.passed &= dh.converged;
            report.dehaan = Some(dh);
            (
                vec![*a0],
                ModelCombination::new().with(c, ModelDistribution::FinitePartPlus(1)),
            )
        }
    };
    for phi in phis {
        let limit_value = limit.pair(phi, tol * 1e-3)?;
        let rows: Vec<f64> = scales
            .par_iter()
            .map(|&s| {
                let mut v = dilate_pair(f, s, phi, tol * 1e-3)?;
                for (n, a_n) in corrections.iter().enumerate() {
                    let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
                    v -= a_n * sign * phi.eval_derivative(n, 0.0)? * s.powi(-(n as i32) - 1);
                }
                if matches!(kind, ExtensionKind::NegInt { .. }) {
                    v -= b_fn(s)? / s * phi.eval(0.0);
                }
                Ok(v / (s.powf(alpha) * l.value(s)) - limit_value)
            })
            .collect::<Result<_>>()?;
        let points: Vec<ResidualPoint> = scales
            .iter()
            .zip(&rows)
            .map(|(&scale, &residual)| ResidualPoint { scale, residual })
            .collect();
        let last = *rows.last().expect("ladder has points");
        let recovered_a0 = match kind {
            ExtensionKind::NonIntegerNegative { a } if a.len() == 1 && phi.eval(0.0) != 0.0 => {
                let s = *scales.last().expect("ladder has points");
                let raw = dilate_pair(f, s, phi, tol * 1e-3)?;
                Some((s * raw - s.powf(alpha + 1.0) * l.value(s) * limit_value) / phi.eval(0.0))
            }
            _ => None,
        };
        let decay = decay_exponent(&scales, &rows);
        let passed = last.abs() <= tol && decay.is_none_or(|p| p > 0.0);
        report.passed &= passed;
        report.items.push(ExtensionItem {
            points,
            decay_exponent: decay,
            last_abs_residual: last.abs(),
            recovered_a0,
            passed,
        });
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalityReport {
    pub base: Vec<f64>,
    pub perturbed: Vec<f64>,
    pub base_limit: f64,
    pub perturbed_limit: f64,
    pub difference: f64,
    /// Ratio ladder of the perturbation alone.
    pub perturbation: Vec<f64>,
    pub identical: bool,
    pub passed: bool,
}

/// Compares the extrapolated limits of `f` and `f + g`.
#[allow(clippy::too_many_arguments)]
pub fn locality_check(
    f: &StructuredUD,
    g: &StructuredUD,
    l: &SlowlyVaryingFn,
    alpha: f64,
    phi: &TestFunction,
    ladder: &Ladder,
    method: Method,
    tol: f64,
) -> Result<LocalityReport> {
    if f.locus != g.locus {
        return Err(Error::Inconsistent("perturbation lives at a different locus".into()));
    }
    if f.locus == Locus::Infinity && !(alpha > -1.0) {
        return Err(invalid("alpha", "locality at infinity needs alpha > -1"));
    }
    let mut sum = f.clone();
    sum.terms.extend(g.terms.iter().cloned());
    sum.points.extend(g.points.iter().copied());
    let quad_tol = tol * 1e-3;
    let base = ratio_ladder(f, l, alpha, phi, ladder, quad_tol)?;
    let perturbed = ratio_ladder(&sum, l, alpha, phi, ladder, quad_tol)?;
    let perturbation = if g.terms.is_empty() && g.points.is_empty() {
        vec![0.0; base.len()]
    } else {
        ratio_ladder(g, l, alpha, phi, ladder, quad_tol)?
            .iter()
            .map(|p| p.ratio)
            .collect()
    };
    let base_limit = extrapolate(&base, method)?.value;
    let perturbed_limit = extrapolate(&perturbed, method)?.value;
    let difference = (base_limit - perturbed_limit).abs();
    Ok(LocalityReport {
        identical: base == perturbed,
        base: base.iter().map(|p| p.ratio).collect(),
        perturbed: perturbed.iter().map(|p| p.ratio).collect(),
        base_limit,
        perturbed_limit,
        difference,
        perturbation,
        passed: difference <= tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZLocalityRow {
    pub n: usize,
    pub values: Vec<ResidualPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZLocalityReport {
    /// Radius below which every coefficient function vanishes.
    pub inner_radius: f64,
    pub psi_norm: ZNorm,
    pub rows: Vec<ZLocalityRow>,
    pub tol: f64,
    pub passed: bool,
}

/// `eps^-N <f(eps x), psi>` along an origin ladder for `N <= n_cap`.
pub fn zspace_locality_check(
    f: &StructuredUD,
    weights: &WeightSequence,
    psi: &TestFunction,
    n_cap: usize,
    ladder: &Ladder,
    tol: f64,
) -> Result<ZLocalityReport> {
    ladder.validate()?;
    if ladder.locus() != Locus::Origin {
        return Err(Error::Inconsistent("Z-space locality runs eps towards 0".into()));
    }
    if !f.points.is_empty() {
        return Err(invalid("f", "point terms do not vanish near 0"));
    }
    let inner_radius = f
        .terms
        .iter()
        .flat_map(|t| t.coeff.active_ranges())
        .map(|(a, b)| {
            if a >= 0.0 {
                a
            } else if b <= 0.0 {
                -b
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min);
    if !(inner_radius > 0.0) {
        return Err(invalid(
            "f",
            "coefficient functions must vanish on a neighbourhood of 0",
        ));
    }
    let (lo, hi) = psi.support();
    let grid: Vec<f64> = (0..=400).map(|i| lo + (hi - lo) * i as f64 / 400.0).collect();
    let psi_norm = zspace_norm(psi, weights, n_cap as f64, 1.0, f.max_order().max(4), &grid)?;
    let scales = ladder.scales();
    let pairings: Vec<f64> = scales
        .par_iter()
        .map(|&eps| dilate_pair(f, eps, psi, 1e-10))
        .collect::<Result<_>>()?;
    let rows: Vec<ZLocalityRow> = (0..=n_cap)
        .map(|n| ZLocalityRow {
            n,
            values: scales
                .iter()
                .zip(&pairings)
                .map(|(&eps, &v)| ResidualPoint {
                    scale: eps,
                    residual: v * eps.powi(-(n as i32)),
                })
                .collect(),
        })
        .collect();
    let passed = rows
        .iter()
        .all(|r| r.values.last().is_some_and(|p| p.residual.abs() <= tol));
    Ok(ZLocalityReport {
        inner_radius,
        psi_norm,
        rows,
        tol,
        passed,
    })
}

/// Ladders of `f` against `-phi'` and of `f'` at degree `alpha - 1` against
/// `phi`, both compared with `<limit, -phi'>`.
#[allow(clippy::too_many_arguments)]
pub fn derivative_consistency(
    f: &StructuredUD,
    l: &SlowlyVaryingFn,
    alpha: f64,
    phi: &TestFunction,
    ladder: &Ladder,
    method: Method,
    limit: &ModelCombination,
    tol: f64,
) -> Result<(LimitEstimate, LimitEstimate)> {
    let direct = quasi_limit(
        f,
        l,
        alpha,
        &phi.differentiated(1).scaled(-1.0),
        ladder,
        method,
        limit,
        tol,
    )?;
    // the derivative's limit g' paired with phi is <g, -phi'>
    let points = ratio_ladder(&differentiate(f), l, alpha - 1.0, phi, ladder, tol)?;
    let derived = LimitEstimate::from_ladder(points, direct.predicted, method)?;
    Ok((direct, derived))
}
