//! Weight sequences `M_p`, the conditions (M.1)-(M.3), and the two tail sums
//!
//! ```text
//! sum_{k>=p} k! l^k / M_k          <= C p! l^p / M_p
//! sum_{k>=p} S(k+1,p+1) l^k / M_k  <= C (2l)^p / M_p
//! ```
//!
//! Values are kept as logarithms throughout; `M_50` for Gevrey `s = 3` is far
//! outside `f64` range.

use std::sync::OnceLock;

use serde::Serialize;

use crate::comb::ln_stirling2;
use crate::error::{invalid, Error, Result};

/// Default number of tabulated indices past `M_0`.
pub const DEFAULT_P_MAX: usize = 64;

/// Hard cap on the number of summands a tail sum may consume.
const MAX_TERMS: usize = 100_000;

const LN_FACT_TABLE: usize = 2048;

/// `ln n!`, tabulated below 2048 and from Stirling's series above.
pub fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..LN_FACT_TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    });
    if n < LN_FACT_TABLE {
        return table[n];
    }
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Generator {
    Gevrey { s: f64 },
    ExplicitTable,
}

/// `log M_p` for `p = 0..=p_max`.
///
/// Gevrey sequences are also evaluated past the table from their closed
/// form, so tail sums never run out of indices for them. Explicit tables
/// stop at `p_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightSequence {
    generator: Generator,
    log_values: Vec<f64>,
}

impl WeightSequence {
    pub fn gevrey(s: f64, p_max: usize) -> Result<Self> {
        if !(s > 1.0) || !s.is_finite() {
            return Err(invalid("s", format!("Gevrey order must exceed 1, got {s}")));
        }
        if p_max < 2 {
            return Err(invalid("p_max", format!("need p_max >= 2, got {p_max}")));
        }
        let log_values = (0..=p_max).map(|p| s * ln_factorial(p)).collect();
        Ok(Self {
            generator: Generator::Gevrey { s },
            log_values,
        })
    }

    /// Builds a sequence from `log M_p` values. `log M_0` must be exactly 0.
    pub fn from_log_values(log_values: Vec<f64>) -> Result<Self> {
        if log_values.len() < 3 {
            return Err(invalid("log_values", "need at least M_0, M_1, M_2"));
        }
        if log_values[0] != 0.0 {
            return Err(invalid(
                "log_values",
                format!("M_0 must be 1, got log M_0 = {}", log_values[0]),
            ));
        }
        if let Some(p) = log_values.iter().position(|v| !v.is_finite()) {
            return Err(invalid("log_values", format!("log M_{p} is not finite")));
        }
        Ok(Self {
            generator: Generator::ExplicitTable,
            log_values,
        })
    }

    /// Builds a sequence from positive values `M_p`.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if let Some(p) = values.iter().position(|v| !(*v > 0.0)) {
            return Err(invalid("values", format!("M_{p} must be positive")));
        }
        Self::from_log_values(values.iter().map(|v| v.ln()).collect())
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn p_max(&self) -> usize {
        self.log_values.len() - 1
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    /// `log M_p`, or `None` past the end of an explicit table.
    pub fn log_m(&self, p: usize) -> Option<f64> {
        match (self.log_values.get(p), self.generator) {
            (Some(v), _) => Some(*v),
            (None, Generator::Gevrey { s }) => Some(s * ln_factorial(p)),
            (None, Generator::ExplicitTable) => None,
        }
    }

    /// Same sequence with `log M_p` replaced; the result is an explicit table.
    pub fn with_entry(&self, p: usize, log_value: f64) -> Result<Self> {
        let mut values = self.log_values.clone();
        if p >= values.len() {
            return Err(invalid("p", format!("index {p} beyond table")));
        }
        values[p] = log_value;
        Self::from_log_values(values)
    }

    /// Upper bound on `M_{k} / M_{k+1}` for every `k >= from`, if one is
    /// available. For Gevrey this ratio is `(k+1)^-s`, decreasing. For
    /// explicit tables, the largest tabulated ratio from `from` on is used
    /// and monotone decay past the table end is assumed.
    fn sup_ratio_from(&self, from: usize) -> Option<f64> {
        match self.generator {
            Generator::Gevrey { s } => Some((from as f64 + 1.0).powf(-s)),
            Generator::ExplicitTable => {
                let p_max = self.p_max();
                if from >= p_max {
                    return None;
                }
                (from..p_max)
                    .map(|k| (self.log_values[k] - self.log_values[k + 1]).exp())
                    .reduce(f64::max)
            }
        }
    }
}

/// Gevrey sequence of order `s` tabulated up to `p_max`.
pub fn make_gevrey(s: f64, p_max: usize) -> Result<WeightSequence> {
    WeightSequence::gevrey(s, p_max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogConvexity {
    pub holds: bool,
    /// Indices `p` with `log M_{p-1} + log M_{p+1} < 2 log M_p`.
    pub violations: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stability {
    pub holds: bool,
    /// Smallest grid `A` that works for `h`.
    pub a: Option<f64>,
    /// First grid `H` for which some grid `A` works.
    pub h: Option<f64>,
    /// Smallest `A` that would work with the chosen (or largest) `H`.
    pub a_needed: f64,
    pub verified_up_to: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonQuasianalyticity {
    pub holds: bool,
    pub a: Option<f64>,
    /// `max_p sum_{q>p} (M_{q-1}/M_q) / (p M_p / M_{p+1})` with the tail
    /// past the table bounded analytically.
    pub a_needed: f64,
    pub verified_up_to: usize,
    pub tail_bound: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub m1: LogConvexity,
    pub m2: Stability,
    pub m3: NonQuasianalyticity,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.m1.holds && self.m2.holds && self.m3.holds
    }
}

/// `H` grid `2^(i/4)`, `i = 0..=40`.
pub fn default_h_grid() -> Vec<f64> {
    (0..=40).map(|i| 2f64.powf(i as f64 / 4.0)).collect()
}

/// `A` grid `10^(i/4)`, `i = 0..=32`.
pub fn default_a_grid() -> Vec<f64> {
    (0..=32).map(|i| 10f64.powf(i as f64 / 4.0)).collect()
}

/// (M.1) on the table, with a rounding slack of `1e-12` relative.
pub fn check_log_convexity(m: &WeightSequence) -> LogConvexity {
    let lv = m.log_values();
    let violations: Vec<usize> = (1..m.p_max())
        .filter(|&p| {
            let slack = 1e-12 * lv[p].abs().max(1.0);
            lv[p - 1] + lv[p + 1] < 2.0 * lv[p] - slack
        })
        .collect();
    LogConvexity {
        holds: violations.is_empty(),
        violations,
    }
}

/// Checks (M.1) on the table, and (M.2)/(M.3) against the search grids.
///
/// All three are finite evidence up to `p_max`. (M.3) for an explicit table
/// cannot be certified past the table, so unless the in-table evidence
/// already refutes it the result is [`Error::TableTooShort`].
pub fn check_conditions(m: &WeightSequence, a_grid: &[f64], h_grid: &[f64]) -> Result<ConditionReport> {
    let p_max = m.p_max();
    if p_max < 10 {
        return Err(invalid("M", format!("need p_max >= 10, got {p_max}")));
    }
    if a_grid.is_empty() || h_grid.is_empty() {
        return Err(invalid("grid", "search grids must be non-empty"));
    }
    let lv = m.log_values();
    let a_max = a_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let m1 = check_log_convexity(m);

    let mut sorted_h: Vec<f64> = h_grid.to_vec();
    sorted_h.sort_by(f64::total_cmp);
    let mut m2 = Stability {
        holds: false,
        a: None,
        h: None,
        a_needed: f64::INFINITY,
        verified_up_to: p_max,
    };
    for &h in &sorted_h {
        let ln_h = h.ln();
        let mut worst = f64::NEG_INFINITY;
        for n in 0..=p_max {
            for p in 0..=n {
                worst = worst.max(lv[n] - lv[p] - lv[n - p] - n as f64 * ln_h);
            }
        }
        let needed = worst.exp() * (1.0 + 1e-12);
        m2.a_needed = needed;
        if needed <= a_max {
            m2.holds = true;
            m2.h = Some(h);
            m2.a = a_grid.iter().cloned().filter(|a| *a >= needed).reduce(f64::min);
            break;
        }
    }

    let m3 = check_m3(m, a_grid, a_max)?;
    Ok(ConditionReport { m1, m2, m3 })
}

fn check_m3(m: &WeightSequence, a_grid: &[f64], a_max: f64) -> Result<NonQuasianalyticity> {
    let lv = m.log_values();
    let p_max = m.p_max();
    // ratio[q] = M_{q-1}/M_q for q = 1..=p_max
    let ratio: Vec<f64> = (0..=p_max)
        .map(|q| if q == 0 { 0.0 } else { (lv[q - 1] - lv[q]).exp() })
        .collect();
    let (tail, tail_desc) = match m.generator() {
        Generator::Gevrey { s } => {
            let big_q = p_max as f64;
            (
                big_q.powf(1.0 - s) / (s - 1.0),
                format!("integral comparison Q^(1-s)/(s-1), Q = {p_max}"),
            )
        }
        Generator::ExplicitTable => (f64::NAN, String::new()),
    };
    // suffix[p] = sum_{q=p+1}^{p_max} ratio[q]
    let mut suffix = vec![0.0; p_max + 1];
    for p in (0..p_max).rev() {
        suffix[p] = suffix[p + 1] + ratio[p + 1];
    }
    let needed_at = |p: usize, tail: f64| (suffix[p] + tail) / (p as f64 * ratio[p + 1]);

    match m.generator() {
        Generator::Gevrey { .. } => {
            let needed = (1..p_max).map(|p| needed_at(p, tail)).fold(0.0, f64::max);
            let a = a_grid.iter().cloned().filter(|a| *a >= needed).reduce(f64::min);
            Ok(NonQuasianalyticity {
                holds: a.is_some(),
                a,
                a_needed: needed,
                verified_up_to: p_max,
                tail_bound: tail_desc,
            })
        }
        Generator::ExplicitTable => {
            let in_table = (1..p_max).map(|p| needed_at(p, 0.0)).fold(0.0, f64::max);
            if in_table > a_max {
                return Ok(NonQuasianalyticity {
                    holds: false,
                    a: None,
                    a_needed: in_table,
                    verified_up_to: p_max,
                    tail_bound: "refuted inside the table".into(),
                });
            }
            // Decay exponent of M_{q-1}/M_q over the last half of the table.
            // A sum of q^-sigma with sigma <= 1 diverges.
            let lo = (p_max / 2).max(1);
            let sigma = -(ratio[p_max].ln() - ratio[lo].ln()) / ((p_max as f64).ln() - (lo as f64).ln());
            if sigma <= 1.0 {
                return Ok(NonQuasianalyticity {
                    holds: false,
                    a: None,
                    a_needed: f64::INFINITY,
                    verified_up_to: p_max,
                    tail_bound: format!("divergent: end-of-table decay exponent {sigma:.3} <= 1"),
                });
            }
            Err(Error::TableTooShort(format!(
                "(M.3) tail past p = {p_max} cannot be bounded for an explicit table \
                 (end-of-table decay exponent {sigma:.3})"
            )))
        }
    }
}

/// A certified infinite sum stored as a logarithm, since values range far
/// outside `f64`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailSum {
    /// `ln` of the partial sum (a lower bound of the full sum).
    pub ln_value: f64,
    /// Certified upper bound on `(sum - partial) / partial`.
    pub rel_truncation: f64,
    /// Index of the last summand included.
    pub last_index: usize,
}

impl TailSum {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }

    /// Absolute truncation bound.
    pub fn truncation_bound(&self) -> f64 {
        self.value() * self.rel_truncation
    }

    /// `ln` of the certified upper bound on the full sum.
    pub fn ln_upper(&self) -> f64 {
        self.ln_value + self.rel_truncation.ln_1p()
    }
}

/// Running log-sum-exp accumulator.
struct LogAccumulator {
    scale: f64,
    scaled: f64,
}

impl LogAccumulator {
    fn new() -> Self {
        Self {
            scale: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    fn push(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term > self.scale {
            self.scaled = self.scaled * (self.scale - ln_term).exp() + 1.0;
            self.scale = ln_term;
        } else {
            self.scaled += (ln_term - self.scale).exp();
        }
    }

    fn ln(&self) -> f64 {
        self.scale + self.scaled.ln()
    }
}

/// Sums `exp(ln_term(k))` for `k >= p` until the geometric bound
/// `env(K) rho / (1 - rho)` on the rest is below `tol` both absolutely and
/// relative to the partial sum. `ln_envelope(K)` dominates every summand from
/// `K` on in the sense that `term(k) <= env(K) rho^(k-K)`, with `rho` from
/// `envelope_ratio(K)`.
fn certified_tail(
    p: usize,
    tol: f64,
    mut ln_term: impl FnMut(usize) -> Option<f64>,
    mut ln_envelope: impl FnMut(usize) -> Option<f64>,
    mut envelope_ratio: impl FnMut(usize) -> Option<f64>,
) -> Result<TailSum> {
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("must be positive, got {tol}")));
    }
    let mut acc = LogAccumulator::new();
    let mut last_bound = f64::INFINITY;
    for k in p..p + MAX_TERMS {
        let Some(t) = ln_term(k) else {
            return Err(Error::TableExhausted {
                index: k,
                bound: last_bound,
                tol,
            });
        };
        acc.push(t);
        let (Some(rho), Some(env)) = (envelope_ratio(k), ln_envelope(k)) else {
            return Err(Error::TableExhausted {
                index: k,
                bound: last_bound,
                tol,
            });
        };
        if rho < 1.0 {
            let ln_bound = env + (rho / (1.0 - rho)).ln();
            let ln_sum = acc.ln();
            last_bound = ln_bound.exp();
            if ln_bound <= tol.ln() && ln_bound - ln_sum <= tol.ln() {
                return Ok(TailSum {
                    ln_value: ln_sum,
                    rel_truncation: (ln_bound - ln_sum).exp(),
                    last_index: k,
                });
            }
        }
    }
    Err(Error::TableExhausted {
        index: p + MAX_TERMS,
        bound: last_bound,
        tol,
    })
}

fn check_ell(ell: f64) -> Result<()> {
    if ell > 0.0 && ell.is_finite() {
        Ok(())
    } else {
        Err(invalid("ell", format!("must be positive and finite, got {ell}")))
    }
}

/// `sum_{k>=p} k! l^k / M_k`, certified to `tol` (absolute and relative).
pub fn tail_factorial_sum(m: &WeightSequence, ell: f64, p: usize, tol: f64) -> Result<TailSum> {
    check_ell(ell)?;
    let ln_ell = ell.ln();
    let term = |k: usize| m.log_m(k).map(|lm| ln_factorial(k) + k as f64 * ln_ell - lm);
    // term(k+1)/term(k) = (k+1) l M_k/M_{k+1}; for k > K bounded by
    // sup_{j>=K} (j+1) l M_j/M_{j+1}. For Gevrey that is l (K+1)^(1-s).
    let ratio = |k: usize| -> Option<f64> {
        match m.generator() {
            Generator::Gevrey { s } => Some(ell * (k as f64 + 1.0).powf(1.0 - s)),
            Generator::ExplicitTable => {
                let p_max = m.p_max();
                if k >= p_max {
                    return None;
                }
                (k..p_max)
                    .map(|j| (j as f64 + 1.0) * ell * (m.log_values()[j] - m.log_values()[j + 1]).exp())
                    .reduce(f64::max)
            }
        }
    };
    certified_tail(p, tol, term, term, ratio)
}

/// `sum_{k>=p} S(k+1, p+1) l^k / M_k`, certified to `tol`.
///
/// The remainder is dominated through `S(k+1,p+1) <= 2^(k+1) (p+1)^(k-p)`,
/// a geometric envelope with ratio `2 l (p+1) M_k/M_{k+1}`.
pub fn tail_stirling_sum(m: &WeightSequence, ell: f64, p: usize, tol: f64) -> Result<TailSum> {
    check_ell(ell)?;
    let ln_ell = ell.ln();
    let ln_p1 = (p as f64 + 1.0).ln();
    let term = |k: usize| m.log_m(k).map(|lm| ln_stirling2(k + 1, p + 1) + k as f64 * ln_ell - lm);
    let envelope = |k: usize| {
        m.log_m(k)
            .map(|lm| (k as f64 + 1.0) * std::f64::consts::LN_2 + (k - p) as f64 * ln_p1 + k as f64 * ln_ell - lm)
    };
    let ratio = |k: usize| m.sup_ratio_from(k).map(|r| 2.0 * ell * (p as f64 + 1.0) * r);
    certified_tail(p, tol, term, envelope, ratio)
}

/// `C` estimate for one of the two tail inequalities over `p = 0..=p_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    /// `ln` of the left-hand sums.
    pub ln_lhs: Vec<f64>,
    /// `ln` of the right-hand envelopes without the constant.
    pub ln_rhs: Vec<f64>,
    /// Certified upper bound on `lhs(p) / rhs(p)`.
    pub ratios: Vec<f64>,
    /// `max_p ratios[p]`.
    pub constant: f64,
    /// Index attaining the maximum.
    pub argmax: usize,
    /// Largest absolute truncation bound among the sums.
    pub truncation_error_bound: f64,
    /// Largest relative truncation bound among the sums.
    pub rel_truncation_bound: f64,
}

impl TailEstimate {
    pub fn lhs(&self, p: usize) -> f64 {
        self.ln_lhs[p].exp()
    }

    pub fn rhs(&self, p: usize) -> f64 {
        self.ln_rhs[p].exp()
    }

    /// Whether `lhs(p) <= C rhs(p)` for every `p`, compared in log space.
    pub fn inequality_holds(&self, c: f64) -> bool {
        let ln_c = c.ln();
        self.ln_lhs
            .iter()
            .zip(&self.ln_rhs)
            .all(|(l, r)| *l <= ln_c + r + 1e-12 * l.abs().max(1.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailBoundReport {
    pub ell: f64,
    pub p_range: (usize, usize),
    pub tol: f64,
    pub factorial: TailEstimate,
    pub stirling: TailEstimate,
    pub satisfied: bool,
}

fn estimate(
    p_max: usize,
    sum: impl Fn(usize) -> Result<TailSum>,
    ln_rhs: impl Fn(usize) -> f64,
) -> Result<TailEstimate> {
    let mut est = TailEstimate {
        ln_lhs: Vec::with_capacity(p_max + 1),
        ln_rhs: Vec::with_capacity(p_max + 1),
        ratios: Vec::with_capacity(p_max + 1),
        constant: 0.0,
        argmax: 0,
        truncation_error_bound: 0.0,
        rel_truncation_bound: 0.0,
    };
    for p in 0..=p_max {
        let s = sum(p)?;
        let r = ln_rhs(p);
        let ratio = (s.ln_upper() - r).exp();
        if ratio > est.constant {
            est.constant = ratio;
            est.argmax = p;
        }
        est.truncation_error_bound = est.truncation_error_bound.max(s.truncation_bound());
        est.rel_truncation_bound = est.rel_truncation_bound.max(s.rel_truncation);
        est.ln_lhs.push(s.ln_value);
        est.ln_rhs.push(r);
        est.ratios.push(ratio);
    }
    Ok(est)
}

/// Estimates `C_l` for both tail inequalities as the maximum certified ratio
/// over `p = 0..=p_max`.
pub fn estimate_tail_constants(m: &WeightSequence, ell: f64, p_max: usize, tol: f64) -> Result<TailBoundReport> {
    check_ell(ell)?;
    if m.generator() == Generator::ExplicitTable && p_max > m.p_max() {
        return Err(invalid("p_max", format!("{p_max} beyond table end {}", m.p_max())));
    }
    let ln_ell = ell.ln();
    let lm = |p: usize| m.log_m(p).expect("index checked above");
    let factorial = estimate(
        p_max,
        |p| tail_factorial_sum(m, ell, p, tol),
        |p| ln_factorial(p) + p as f64 * ln_ell - lm(p),
    )?;
    let stirling = estimate(
        p_max,
        |p| tail_stirling_sum(m, ell, p, tol),
        |p| p as f64 * (2.0 * ell).ln() - lm(p),
    )?;
    let satisfied = factorial.constant.is_finite()
        && stirling.constant.is_finite()
        && factorial.truncation_error_bound < tol
        && stirling.truncation_error_bound < tol;
    Ok(TailBoundReport {
        ell,
        p_range: (0, p_max),
        tol,
        factorial,
        stirling,
        satisfied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn gevrey_table_values() {
        let m = make_gevrey(2.0, 4).unwrap();
        assert_relative_eq!(m.log_values()[3], 36f64.ln(), max_relative = 1e-15);
        assert_eq!(m.log_values()[0], 0.0);
        assert!(make_gevrey(1.5, 0).is_err());
        assert!(make_gevrey(1.0, 10).is_err());
        assert!(make_gevrey(0.5, 10).is_err());
    }

    #[test]
    fn ln_factorial_continuity_at_table_edge() {
        let below: f64 = (1..LN_FACT_TABLE).map(|k| (k as f64).ln()).sum();
        assert_relative_eq!(ln_factorial(LN_FACT_TABLE - 1), below, max_relative = 1e-13);
        let above = below + (LN_FACT_TABLE as f64).ln();
        assert_relative_eq!(ln_factorial(LN_FACT_TABLE), above, max_relative = 1e-13);
    }

    #[test]
    fn gevrey_conditions_hold() {
        let m = make_gevrey(2.0, 40).unwrap();
        let r = check_conditions(&m, &default_a_grid(), &default_h_grid()).unwrap();
        assert!(r.all_hold(), "{r:?}");
        // binomial(p+q,p)^2 <= 4^(p+q): H = 4 with A = 1 suffices
        assert!(r.m2.h.unwrap() <= 4.0 + 1e-12);
        let m50 = make_gevrey(2.0, 50).unwrap();
        assert!(
            check_conditions(&m50, &default_a_grid(), &default_h_grid())
                .unwrap()
                .m1
                .holds
        );
    }

    #[test]
    fn constant_table_fails_m3() {
        let m = WeightSequence::from_values(&[1.0; 41]).unwrap();
        let r = check_conditions(&m, &default_a_grid(), &default_h_grid()).unwrap();
        assert!(!r.m3.holds);
        assert!(r.m1.holds);
    }

    #[test]
    fn explicit_gevrey_like_table_is_too_short_for_m3() {
        let g = make_gevrey(2.0, 30).unwrap();
        let m = WeightSequence::from_log_values(g.log_values().to_vec()).unwrap();
        assert!(matches!(
            check_conditions(&m, &default_a_grid(), &default_h_grid()),
            Err(Error::TableTooShort(_))
        ));
    }

    #[test]
    fn corrupted_entry_breaks_convexity_next_to_it() {
        let g = make_gevrey(2.0, 40).unwrap();
        let i = 20;
        let m = g.with_entry(i, g.log_values()[i] - 5.0).unwrap();
        let m1 = check_log_convexity(&m);
        assert!(!m1.holds);
        assert!(m1.violations.iter().all(|p| p.abs_diff(i) == 1), "{:?}", m1.violations);
    }

    #[test]
    fn factorial_tail_examples() {
        let m = make_gevrey(2.0, DEFAULT_P_MAX).unwrap();
        let t0 = tail_factorial_sum(&m, 1.0, 0, 1e-12).unwrap();
        assert!((t0.value() - E).abs() < 1e-12);
        assert!(t0.truncation_bound() < 1e-12);
        let t3 = tail_factorial_sum(&m, 1.0, 3, 1e-12).unwrap();
        assert!((t3.value() - (E - 2.5)).abs() < 1e-12);
        let small = tail_factorial_sum(&m, 1e-9, 0, 1e-14).unwrap();
        assert!((small.value() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn stirling_tail_examples() {
        let m = make_gevrey(2.0, DEFAULT_P_MAX).unwrap();
        // sum 1/(k!)^2 = I_0(2)
        let t = tail_stirling_sum(&m, 1.0, 0, 1e-13).unwrap();
        assert!((t.value() - 2.279_585_302_336_067).abs() < 1e-12);
        let r = estimate_tail_constants(&m, 2.0, 5, 1e-12).unwrap();
        let c = r.stirling.constant;
        let lhs = tail_stirling_sum(&m, 2.0, 5, 1e-12).unwrap().value();
        let rhs = 4f64.powi(5) / (120f64 * 120.0);
        assert!(lhs <= c * rhs);
    }

    #[test]
    fn stirling_tail_first_term() {
        let m = make_gevrey(2.0, DEFAULT_P_MAX).unwrap();
        let ell: f64 = 0.75;
        for p in [1usize, 4, 9] {
            let t = tail_stirling_sum(&m, ell, p, 1e-12).unwrap();
            let first = p as f64 * ell.ln() - m.log_m(p).unwrap();
            assert!(t.ln_value >= first);
        }
    }

    #[test]
    fn explicit_table_exhausts() {
        let m = WeightSequence::from_values(&[1.0; 20]).unwrap();
        assert!(matches!(
            tail_factorial_sum(&m, 1.0, 0, 1e-12),
            Err(Error::TableExhausted { .. })
        ));
    }

    #[test]
    fn tail_constant_examples() {
        let m = make_gevrey(2.0, DEFAULT_P_MAX).unwrap();
        let r = estimate_tail_constants(&m, 1.0, 20, 1e-12).unwrap();
        assert!((r.factorial.ratios[0] - E).abs() < 1e-11);
        assert!(r.factorial.constant >= E - 1e-12);
        let r0 = estimate_tail_constants(&m, 1.0, 0, 1e-12).unwrap();
        assert_eq!(r0.factorial.constant, r0.factorial.ratios[0]);
        let m3 = make_gevrey(3.0, DEFAULT_P_MAX).unwrap();
        let r3 = estimate_tail_constants(&m3, 0.5, 50, 1e-12).unwrap();
        assert!(r3.satisfied && r3.factorial.constant.is_finite());
    }

    #[test]
    fn factorial_lhs_decreases_for_small_ell() {
        for s in [1.5, 2.0, 3.0] {
            let m = make_gevrey(s, DEFAULT_P_MAX).unwrap();
            for ell in [0.25, 0.5, 1.0] {
                let r = estimate_tail_constants(&m, ell, 50, 1e-12).unwrap();
                for p in 0..50 {
                    assert!(r.factorial.ln_lhs[p + 1] < r.factorial.ln_lhs[p]);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn telescoping(s in 1.2f64..3.5, ell in 0.1f64..4.0, p in 0usize..40) {
            let m = make_gevrey(s, DEFAULT_P_MAX).unwrap();
            let tol = 1e-12;
            let a = tail_factorial_sum(&m, ell, p, tol).unwrap();
            let b = tail_factorial_sum(&m, ell, p + 1, tol).unwrap();
            let first = (ln_factorial(p) + p as f64 * ell.ln() - m.log_m(p).unwrap()).exp();
            let scale = a.value().max(1.0);
            prop_assert!((a.value() - first - b.value()).abs() <= 2.0 * tol * scale);
        }

        #[test]
        fn tail_inequalities_hold(s in prop::sample::select(vec![1.5, 2.0, 3.0]),
                                   ell in prop::sample::select(vec![0.25, 0.5, 1.0, 2.0, 4.0])) {
            let m = make_gevrey(s, DEFAULT_P_MAX).unwrap();
            let r = estimate_tail_constants(&m, ell, 50, 1e-12).unwrap();
            prop_assert!(r.satisfied);
            prop_assert!(r.factorial.inequality_holds(r.factorial.constant));
            prop_assert!(r.stirling.inequality_holds(r.stirling.constant));
        }
    }
}
