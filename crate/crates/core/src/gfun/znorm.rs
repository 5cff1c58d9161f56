//! Truncated evaluation of the weighted sup-norm
//! `sup_{x, m} (1+|x|)^(n+m) |phi^(m)(x)| / (h^m M_m)`.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::weights::WeightSequence;

use super::testfn::TestFunction;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZNorm {
    pub n: f64,
    pub h: f64,
    pub m_cap: usize,
    /// Supremum over the finite grid and `m <= m_cap`; a lower bound for the
    /// full norm.
    pub value: f64,
    pub argmax_x: f64,
    pub argmax_m: usize,
    pub grid_points: usize,
}

pub fn zspace_norm(
    phi: &TestFunction,
    weights: &WeightSequence,
    n: f64,
    h: f64,
    m_cap: usize,
    grid: &[f64],
) -> Result<ZNorm> {
    if !(h > 0.0) {
        return Err(invalid("h", format!("need h > 0, got {h}")));
    }
    if grid.is_empty() {
        return Err(invalid("grid", "empty sample grid"));
    }
    phi.check_order(m_cap)?;
    let mut best = ZNorm {
        n,
        h,
        m_cap,
        value: 0.0,
        argmax_x: grid[0],
        argmax_m: 0,
        grid_points: grid.len(),
    };
    let mut best_ln = f64::NEG_INFINITY;
    for m in 0..=m_cap {
        let ln_m = weights
            .log_m(m)
            .ok_or_else(|| invalid("m_cap", format!("weight sequence has no entry {m}")))?;
        let ln_scale = m as f64 * h.ln() + ln_m;
        for &x in grid {
            let d = phi.derivative(m, x).abs();
            if d == 0.0 {
                continue;
            }
            let ln_v = (n + m as f64) * (1.0 + x.abs()).ln() + d.ln() - ln_scale;
            if ln_v > best_ln {
                best_ln = ln_v;
                best.argmax_x = x;
                best.argmax_m = m;
            }
        }
    }
    best.value = best_ln.exp();
    Ok(best)
}
