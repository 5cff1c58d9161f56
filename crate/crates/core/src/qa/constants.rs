//! Limit constants predicted by the structure theorems.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gfun::{CoeffFn, ModelCombination, StructuredUD};
use crate::quad::{integrate_with_breaks, Endpoint, QuadOptions};
use crate::svf::{Locus, SlowlyVaryingFn};

use super::ladder::{extrapolate, Ladder, LadderPoint, Method};

/// Leading coefficients `c_m^+` and `c_m^-` of the order-`m` term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CEntry {
    pub m: usize,
    pub c_plus: f64,
    pub c_minus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructuralData {
    pub alpha: f64,
    /// Least `k` with `-(k+1) < alpha`, or `-alpha` when that is an integer.
    pub k: usize,
    pub locus: Locus,
    pub c_table: Vec<CEntry>,
    pub c_star: Option<f64>,
    pub c_star1: Option<f64>,
    pub c_star2: Option<f64>,
}

fn negint_order(alpha: f64) -> Option<usize> {
    (alpha < 0.0 && alpha.fract() == 0.0).then(|| (-alpha) as usize)
}

fn order_for(alpha: f64) -> usize {
    negint_order(alpha).unwrap_or_else(|| {
        if alpha > -1.0 {
            0
        } else {
            (-alpha - 1.0).floor() as usize
        }
    })
}

fn merge(table: &[CEntry]) -> Vec<CEntry> {
    let mut out: Vec<CEntry> = Vec::new();
    for e in table {
        match out.iter_mut().find(|x| x.m == e.m) {
            Some(x) => {
                x.c_plus += e.c_plus;
                x.c_minus += e.c_minus;
            }
            None => out.push(*e),
        }
    }
    out.sort_by_key(|e| e.m);
    out
}

impl StructuralData {
    pub fn noninteger(alpha: f64, locus: Locus, c_table: &[CEntry]) -> Result<Self> {
        if negint_order(alpha).is_some() || !alpha.is_finite() {
            return Err(invalid(
                "alpha",
                format!("expected a degree outside the negative integers, got {alpha}"),
            ));
        }
        Ok(Self {
            alpha,
            k: order_for(alpha),
            locus,
            c_table: merge(c_table),
            c_star: None,
            c_star1: None,
            c_star2: None,
        })
    }

    /// Data at infinity for `alpha = -k`. Rejects `c_{k-1}^+ != c_{k-1}^-`.
    pub fn negint(k: usize, c_table: &[CEntry], c_star: f64) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k", "need k >= 1"));
        }
        let c_table = merge(c_table);
        if let Some(e) = c_table.iter().find(|e| e.m + 1 < k) {
            return Err(invalid("c_table", format!("order {} is below k - 1 = {}", e.m, k - 1)));
        }
        if let Some(e) = c_table.iter().find(|e| e.m + 1 == k) {
            let scale = e.c_plus.abs().max(e.c_minus.abs()).max(1.0);
            if (e.c_plus - e.c_minus).abs() > 1e-12 * scale {
                return Err(Error::Inconsistent(format!(
                    "c_{}^+ = {} differs from c_{}^- = {}",
                    e.m, e.c_plus, e.m, e.c_minus
                )));
            }
        }
        Ok(Self {
            alpha: -(k as f64),
            k,
            locus: Locus::Infinity,
            c_table,
            c_star: Some(c_star),
            c_star1: None,
            c_star2: None,
        })
    }

    /// Data at the origin for `alpha = -k`; `c_table` holds orders `m >= k`.
    pub fn origin(k: usize, c_table: &[CEntry], c_star1: f64, c_star2: f64) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k", "need k >= 1"));
        }
        let c_table = merge(c_table);
        if let Some(e) = c_table.iter().find(|e| e.m < k) {
            return Err(invalid("c_table", format!("order {} is below k = {k}", e.m)));
        }
        Ok(Self {
            alpha: -(k as f64),
            k,
            locus: Locus::Origin,
            c_table,
            c_star: None,
            c_star1: Some(c_star1),
            c_star2: Some(c_star2),
        })
    }

    /// The limit distribution these constants describe.
    pub fn limit(&self) -> Result<ModelCombination> {
        if negint_order(self.alpha).is_none() {
            let (c_minus, c_plus) = predicted_constants_noninteger(self)?;
            return Ok(ModelCombination::homogeneous(c_minus, c_plus, self.alpha));
        }
        let (gamma, beta) = match self.locus {
            Locus::Infinity => predicted_constants_negint(self)?,
            Locus::Origin => predicted_constants_origin(self)?,
        };
        Ok(ModelCombination::negint(self.k, gamma, beta))
    }
}

/// `Gamma(alpha+m+1) / Gamma(alpha+1) = prod_{i=1}^m (alpha+i)`.
pub fn gamma_ratio(alpha: f64, m: usize) -> f64 {
    (1..=m).map(|i| alpha + i as f64).product()
}

/// `(c_-, c_+)` with `c_pm = sum_m c_m^pm Gamma(alpha+m+1)/Gamma(alpha+1)`.
pub fn predicted_constants_noninteger(data: &StructuralData) -> Result<(f64, f64)> {
    if negint_order(data.alpha).is_some() {
        return Err(invalid("alpha", format!("{} is a negative integer", data.alpha)));
    }
    let (mut minus, mut plus) = (0.0, 0.0);
    for e in &data.c_table {
        let g = gamma_ratio(data.alpha, e.m);
        minus += e.c_minus * g;
        plus += e.c_plus * g;
    }
    Ok((minus, plus))
}

fn sign_factorial(k: usize) -> f64 {
    let f: f64 = (1..k).map(|i| i as f64).product();
    if (k - 1) % 2 == 1 {
        -f
    } else {
        f
    }
}

/// `(gamma, beta)` at infinity for `alpha = -k`.
pub fn predicted_constants_negint(data: &StructuralData) -> Result<(f64, f64)> {
    let k = negint_order(data.alpha).ok_or_else(|| invalid("alpha", "expected a negative integer degree"))?;
    let c_star = data.c_star.ok_or(Error::Missing("c_star"))?;
    let low = data.c_table.iter().find(|e| e.m + 1 == k);
    if let Some(e) = low {
        let scale = e.c_plus.abs().max(e.c_minus.abs()).max(1.0);
        if (e.c_plus - e.c_minus).abs() > 1e-12 * scale {
            return Err(Error::Inconsistent(format!("c_{}^+ != c_{}^-", e.m, e.m)));
        }
    }
    let gamma = c_star
        + data
            .c_table
            .iter()
            .filter(|e| e.m >= k)
            .map(|e| e.c_plus - e.c_minus)
            .sum::<f64>();
    let beta = sign_factorial(k) * low.map_or(0.0, |e| e.c_plus);
    Ok((gamma, beta))
}

/// `(gamma, beta)` at the origin for `alpha = -k`.
pub fn predicted_constants_origin(data: &StructuralData) -> Result<(f64, f64)> {
    let k = negint_order(data.alpha).ok_or_else(|| invalid("alpha", "expected a negative integer degree"))?;
    let c1 = data.c_star1.ok_or(Error::Missing("c_star1"))?;
    let c2 = data.c_star2.ok_or(Error::Missing("c_star2"))?;
    let gamma = c1
        + data
            .c_table
            .iter()
            .filter(|e| e.m >= k)
            .map(|e| e.c_plus - e.c_minus)
            .sum::<f64>();
    Ok((gamma, sign_factorial(k) * c2))
}

/// Reads `c_m^pm` off the power terms of `f` whose exponent is the leading
/// one for their order. Other terms must be of lower order and contribute 0.
pub fn c_table_from_terms(f: &StructuredUD, alpha: f64) -> Result<Vec<CEntry>> {
    let k = negint_order(alpha);
    let mut table = Vec::new();
    for t in &f.terms {
        let leading = match k {
            Some(k) => t.order as f64 - k as f64,
            None => alpha + t.order as f64,
        };
        if let CoeffFn::Power {
            c_plus, c_minus, power, ..
        } = t.coeff
        {
            let grows_faster = match f.locus {
                Locus::Infinity => power > leading + 1e-12,
                Locus::Origin => power < leading - 1e-12,
            };
            if grows_faster {
                return Err(Error::Inconsistent(format!(
                    "order {} term has exponent {power}, beyond the leading {leading}",
                    t.order
                )));
            }
            if (power - leading).abs() <= 1e-12 {
                table.push(CEntry {
                    m: t.order,
                    c_plus,
                    c_minus,
                });
            }
        }
    }
    Ok(merge(&table))
}

fn extrapolated(scales: &[f64], values: Vec<f64>, method: Method) -> Result<f64> {
    let pts: Vec<LadderPoint> = scales
        .iter()
        .zip(values)
        .map(|(&scale, ratio)| LadderPoint { scale, ratio })
        .collect();
    Ok(extrapolate(&pts, method)?.value)
}

/// `int_a^b` of a coefficient function, split at its breakpoints.
pub fn integrate_coeff(g: &CoeffFn, a: f64, b: f64, tol: f64) -> Result<f64> {
    let sing: Vec<(f64, Endpoint)> = g.singularity_at_zero().map(|e| (0.0, e)).into_iter().collect();
    let opts = QuadOptions {
        abs_tol: tol,
        rel_tol: tol,
        ..QuadOptions::default()
    };
    let mut total = 0.0;
    for (lo, hi) in g.active_ranges() {
        let (lo, hi) = (lo.max(a), hi.min(b));
        if hi > lo {
            total += integrate_with_breaks(|x| g.eval(x), lo, hi, &g.breakpoints(), &sing, &opts)?.value;
        }
    }
    Ok(total)
}

/// `c*_{k-1} = lim (1/L(x)) int_{-x}^x f_{k-1}`, extrapolated along `ladder`.
pub fn c_star_from_terms(
    f: &StructuredUD,
    k: usize,
    l: &SlowlyVaryingFn,
    ladder: &Ladder,
    method: Method,
    tol: f64,
) -> Result<f64> {
    let low: Vec<&CoeffFn> = f.terms.iter().filter(|t| t.order + 1 == k).map(|t| &t.coeff).collect();
    if low.is_empty() {
        return Ok(0.0);
    }
    let scales = ladder.scales();
    let values = scales
        .iter()
        .map(|&x| {
            let s: f64 = low
                .iter()
                .map(|g| integrate_coeff(g, -x, x, tol))
                .sum::<Result<f64>>()?;
            Ok(s / l.value(x))
        })
        .collect::<Result<Vec<f64>>>()?;
    extrapolated(&scales, values, method)
}

/// `(c*_1, c*_2)` from the primitive terms of order `k` at the origin:
/// `c*_1 = lim (F(x) - F(-x))/L(x)` and `c*_2 = lim (F(e x) - F(x))/L(x)`.
pub fn origin_stars_from_terms(
    f: &StructuredUD,
    k: usize,
    l: &SlowlyVaryingFn,
    ladder: &Ladder,
    method: Method,
) -> Result<(f64, f64)> {
    let prims: Vec<&CoeffFn> = f
        .terms
        .iter()
        .filter(|t| t.order == k && matches!(t.coeff, CoeffFn::OriginPrimitive { .. }))
        .map(|t| &t.coeff)
        .collect();
    let big_f = |x: f64| prims.iter().map(|g| g.eval(x)).sum::<f64>();
    let scales = ladder.scales();
    let c1: Vec<f64> = scales.iter().map(|&x| (big_f(x) - big_f(-x)) / l.value(x)).collect();
    let c2: Vec<f64> = scales
        .iter()
        .map(|&x| (big_f(std::f64::consts::E * x) - big_f(x)) / l.value(x))
        .collect();
    Ok((extrapolated(&scales, c1, method)?, extrapolated(&scales, c2, method)?))
}

/// Structural data of `f` at degree `alpha`, with `c*` values computed
/// numerically along `ladder`.
pub fn structural_data(
    f: &StructuredUD,
    alpha: f64,
    l: &SlowlyVaryingFn,
    ladder: &Ladder,
    method: Method,
    tol: f64,
) -> Result<StructuralData> {
    let table = c_table_from_terms(f, alpha)?;
    match (negint_order(alpha), f.locus) {
        (None, locus) => StructuralData::noninteger(alpha, locus, &table),
        (Some(k), Locus::Infinity) => {
            let c_star = c_star_from_terms(f, k, l, ladder, method, tol)?;
            StructuralData::negint(k, &table, c_star)
        }
        (Some(k), Locus::Origin) => {
            let (c1, c2) = origin_stars_from_terms(f, k, l, ladder, method)?;
            StructuralData::origin(k, &table, c1, c2)
        }
    }
}
