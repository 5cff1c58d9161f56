//! Geometric dilation ladders and limit extrapolation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gfun::{dilate_pair, ModelCombination, StructuredUD, TestFunction};
use crate::svf::{Locus, SlowlyVaryingFn};

/// Smallest and largest admissible ladder scale.
pub const SCALE_RANGE: (f64, f64) = (1e-8, 1e8);

/// `base * ratio^i` for `i < count`. Ratio above 1 runs towards infinity,
/// below 1 towards the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ladder {
    pub base: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Ladder {
    pub fn new(base: f64, ratio: f64, count: usize) -> Result<Self> {
        let l = Self { base, ratio, count };
        l.validate()?;
        Ok(l)
    }

    /// Seven decades from 1, in the direction of the locus.
    pub fn default_for(locus: Locus) -> Self {
        let ratio = match locus {
            Locus::Infinity => 10.0,
            Locus::Origin => 0.1,
        };
        Self {
            base: 1.0,
            ratio,
            count: 7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(invalid("ladder.count", "a ladder needs at least two points"));
        }
        if !(self.ratio > 0.0) || self.ratio == 1.0 || !self.ratio.is_finite() {
            return Err(invalid(
                "ladder.ratio",
                format!("ratio must be positive and not 1, got {}", self.ratio),
            ));
        }
        let last = self.base * self.ratio.powi(self.count as i32 - 1);
        for (name, v) in [("ladder.base", self.base), ("ladder end", last)] {
            if !(v >= SCALE_RANGE.0 && v <= SCALE_RANGE.1) {
                return Err(invalid(
                    "ladder",
                    format!("{name} = {v:e} is outside [{:e}, {:e}]", SCALE_RANGE.0, SCALE_RANGE.1),
                ));
            }
        }
        Ok(())
    }

    pub fn locus(&self) -> Locus {
        if self.ratio > 1.0 {
            Locus::Infinity
        } else {
            Locus::Origin
        }
    }

    pub fn scales(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.base * self.ratio.powi(i as i32)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PlainLast,
    /// Eliminates `b` in `r = c + b / |log s|` from the last two points.
    RichardsonLog,
    /// Least squares in `u = 1 / |log s|`, quadratic once four points have
    /// `|log s| >= 1`.
    FitAgainstInvLog,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LadderPoint {
    pub scale: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    /// Change of the estimate when the last ladder point is dropped.
    pub spread: f64,
}

pub fn extrapolate(points: &[LadderPoint], method: Method) -> Result<Extrapolation> {
    let estimate = |pts: &[LadderPoint]| -> Option<f64> {
        match method {
            Method::PlainLast => pts.last().map(|p| p.ratio),
            Method::RichardsonLog => {
                let usable: Vec<(f64, f64)> = log_points(pts);
                let n = usable.len();
                if n < 2 {
                    return None;
                }
                let ((u1, r1), (u2, r2)) = (usable[n - 2], usable[n - 1]);
                Some((r2 * u1 - r1 * u2) / (u1 - u2))
            }
            Method::FitAgainstInvLog => {
                let usable = log_points(pts);
                let degree = if usable.len() >= 4 { 2 } else { 1 };
                if usable.len() < degree + 1 {
                    return None;
                }
                least_squares_intercept(&usable, degree)
            }
        }
    };
    let value = estimate(points).ok_or_else(|| invalid("ladder", "too few usable ladder points for the method"))?;
    let spread = if points.len() > 1 {
        estimate(&points[..points.len() - 1]).map_or(f64::INFINITY, |prev| (value - prev).abs())
    } else {
        f64::INFINITY
    };
    Ok(Extrapolation { value, spread })
}

fn log_points(pts: &[LadderPoint]) -> Vec<(f64, f64)> {
    pts.iter()
        .filter(|p| p.scale.ln().abs() >= 1.0)
        .map(|p| (1.0 / p.scale.ln().abs(), p.ratio))
        .collect()
}

/// Intercept of the polynomial least-squares fit of `r` against `u`.
fn least_squares_intercept(pts: &[(f64, f64)], degree: usize) -> Option<f64> {
    let n = degree + 1;
    let mut a = vec![vec![0.0; n + 1]; n];
    for &(u, r) in pts {
        let pows: Vec<f64> = (0..n).map(|i| u.powi(i as i32)).collect();
        for i in 0..n {
            for j in 0..n {
                a[i][j] += pows[i] * pows[j];
            }
            a[i][n] += pows[i] * r;
        }
    }
    // Gauss-Jordan with partial pivoting on the normal equations
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        a.swap(col, pivot);
        let p = a[col][col];
        if p.abs() < 1e-300 {
            return None;
        }
        a[col][col..=n].iter_mut().for_each(|v| *v /= p);
        let pivot_row = a[col].clone();
        for (row, r) in a.iter_mut().enumerate() {
            if row != col {
                let factor = r[col];
                for (v, pv) in r[col..=n].iter_mut().zip(&pivot_row[col..=n]) {
                    *v -= factor * pv;
                }
            }
        }
    }
    Some(a[0][n])
}

/// Residuals are normalized ratios of order one; below this they are
/// rounding noise and carry no rate.
pub const RESIDUAL_NOISE: f64 = 1e-13;

/// Least-squares slope of `-log |residual|` against `log` of the distance
/// to the locus; `None` with fewer than two residuals above the noise floor.
pub fn decay_exponent(scales: &[f64], residuals: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = scales
        .iter()
        .zip(residuals)
        .filter(|(_, r)| r.abs() > RESIDUAL_NOISE && r.is_finite())
        .map(|(s, r)| (s.ln().abs(), r.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}

/// `<f(s x), phi> / (s^alpha L(s))` at every scale, evaluated in parallel.
pub fn ratio_ladder(
    f: &StructuredUD,
    l: &SlowlyVaryingFn,
    alpha: f64,
    phi: &TestFunction,
    ladder: &Ladder,
    tol: f64,
) -> Result<Vec<LadderPoint>> {
    ladder.validate()?;
    if ladder.locus() != f.locus || l.locus() != f.locus {
        return Err(Error::Inconsistent(format!(
            "ladder runs to {}, distribution is at {}, L is at {}",
            ladder.locus(),
            f.locus,
            l.locus()
        )));
    }
    ladder
        .scales()
        .into_par_iter()
        .map(|s| {
            let v = dilate_pair(f, s, phi, tol)?;
            Ok(LadderPoint {
                scale: s,
                ratio: v / (s.powf(alpha) * l.value(s)),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub ladder: Vec<LadderPoint>,
    pub extrapolated: f64,
    pub predicted: f64,
    pub abs_error: f64,
    /// Relative to `predicted`, or equal to `abs_error` when that is 0.
    pub rel_error: f64,
    pub method: Method,
    pub spread: f64,
    /// Fitted `p` in `|ratio - predicted| ~ scale^-p` (or `eps^p`).
    pub decay_exponent: Option<f64>,
}

impl LimitEstimate {
    pub fn from_ladder(ladder: Vec<LadderPoint>, predicted: f64, method: Method) -> Result<Self> {
        let ex = extrapolate(&ladder, method)?;
        let abs_error = (ex.value - predicted).abs();
        let rel_error = if predicted != 0.0 {
            abs_error / predicted.abs()
        } else {
            abs_error
        };
        let scales: Vec<f64> = ladder.iter().map(|p| p.scale).collect();
        let residuals: Vec<f64> = ladder.iter().map(|p| p.ratio - predicted).collect();
        Ok(Self {
            decay_exponent: decay_exponent(&scales, &residuals),
            ladder,
            extrapolated: ex.value,
            predicted,
            abs_error,
            rel_error,
            method,
            spread: ex.spread,
        })
    }

    /// `(scale, ratio, predicted, abs_err, rel_err)` per ladder point.
    pub fn rows(&self) -> Vec<[f64; 5]> {
        self.ladder
            .iter()
            .map(|p| {
                let abs = (p.ratio - self.predicted).abs();
                let rel = if self.predicted != 0.0 {
                    abs / self.predicted.abs()
                } else {
                    abs
                };
                [p.scale, p.ratio, self.predicted, abs, rel]
            })
            .collect()
    }
}

/// Ratio ladder for `f` compared with the pairing of `limit` against `phi`.
#[allow(clippy::too_many_arguments)]
pub fn quasi_limit(
    f: &StructuredUD,
    l: &SlowlyVaryingFn,
    alpha: f64,
    phi: &TestFunction,
    ladder: &Ladder,
    method: Method,
    limit: &ModelCombination,
    tol: f64,
) -> Result<LimitEstimate> {
    let points = ratio_ladder(f, l, alpha, phi, ladder, tol)?;
    let predicted = limit.pair(phi, tol)?;
    LimitEstimate::from_ladder(points, predicted, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pts(f: impl Fn(f64) -> f64) -> Vec<LadderPoint> {
        Ladder::default_for(Locus::Infinity)
            .scales()
            .into_iter()
            .map(|s| LadderPoint { scale: s, ratio: f(s) })
            .collect()
    }

    #[test]
    fn richardson_removes_inverse_log() {
        let p = pts(|s| 3.0 + 2.0 / s.ln().max(1e-300));
        let ex = extrapolate(&p, Method::RichardsonLog).unwrap();
        assert_abs_diff_eq!(ex.value, 3.0, epsilon = 1e-12);
        let fit = extrapolate(&p, Method::FitAgainstInvLog).unwrap();
        assert_abs_diff_eq!(fit.value, 3.0, epsilon = 1e-10);
    }

    #[test]
    fn quadratic_fit_removes_second_order() {
        let p = pts(|s| {
            let u = 1.0 / s.ln().abs().max(1e-300);
            -1.0 + 0.5 * u + 4.0 * u * u
        });
        assert_abs_diff_eq!(
            extrapolate(&p, Method::FitAgainstInvLog).unwrap().value,
            -1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn decay_exponent_of_power_law() {
        let s: Vec<f64> = (0..6).map(|i| 10f64.powi(i)).collect();
        let r: Vec<f64> = s.iter().map(|x| 3.0 * x.powf(-1.5)).collect();
        assert_abs_diff_eq!(decay_exponent(&s, &r).unwrap(), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn ladder_validation() {
        assert!(Ladder::new(1.0, 10.0, 7).is_ok());
        assert!(Ladder::new(1.0, 10.0, 10).is_err());
        assert!(Ladder::new(1e-9, 10.0, 3).is_err());
        assert!(Ladder::new(1.0, 1.0, 3).is_err());
        let origin = Ladder::default_for(Locus::Origin);
        assert_eq!(origin.locus(), Locus::Origin);
        assert_abs_diff_eq!(origin.scales()[6], 1e-6, epsilon = 1e-20);
    }
}
