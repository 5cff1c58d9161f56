//! Dispatch from a validated [`Scenario`] to the library checks.

use std::time::Instant;

use qakit_core::gfun::{ModelCombination, ModelDistribution, TestFunction};
use qakit_core::qa::{
    extension_expansion, negint_expansion_check, quasi_limit, structural_data, ExtensionKind, LimitEstimate,
};
use qakit_core::weights::{check_conditions, default_a_grid, default_h_grid, estimate_tail_constants};
use serde::Serialize;
use serde_json::{json, Value};

use crate::scenario::{ExtensionSpec, Scenario, ScenarioKind};

/// Largest `p` for the weight tail estimates unless the scenario says otherwise.
pub const DEFAULT_TAIL_P_MAX: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Item {
    pub label: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
    /// `(scale, ratio, predicted, abs_err, rel_err)` rows, written as CSV.
    #[serde(skip)]
    pub ladder: Option<Vec<[f64; 5]>>,
}

impl Item {
    fn ok(label: impl Into<String>, pass: bool, detail: Value) -> Self {
        Self {
            label: label.into(),
            pass,
            error: None,
            detail,
            ladder: None,
        }
    }

    fn failed(label: impl Into<String>, err: impl ToString) -> Self {
        Self {
            label: label.into(),
            pass: false,
            error: Some(err.to_string()),
            detail: Value::Null,
            ladder: None,
        }
    }

    fn with_ladder(mut self, rows: Vec<[f64; 5]>) -> Self {
        self.ladder = Some(rows);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    pub items: Vec<Item>,
    /// Conjunction of every item.
    pub pass: bool,
    /// Not part of the deterministic content.
    pub wall_clock_s: f64,
}

/// Runs a validated scenario. Library errors become failed items; nothing
/// here touches the filesystem.
pub fn run_scenario(s: &Scenario) -> Report {
    let start = Instant::now();
    let items = match s.kind {
        ScenarioKind::CombVerify => comb(s),
        ScenarioKind::WeightsVerify => weights(s),
        ScenarioKind::QuasiLimit => limit(s),
        ScenarioKind::NegintExpansion => negint(s),
        ScenarioKind::Extension => extension(s),
        ScenarioKind::Zlocality => zlocality(s),
    };
    let items = items.unwrap_or_else(|e| vec![Item::failed("setup", e)]);
    let pass = !items.is_empty() && items.iter().all(|i| i.pass);
    Report {
        scenario: s.clone(),
        items,
        pass,
        wall_clock_s: start.elapsed().as_secs_f64(),
    }
}

type Items = qakit_core::Result<Vec<Item>>;

fn comb(s: &Scenario) -> Items {
    Ok(qakit_core::comb::verify_suite(s.m_max())
        .into_iter()
        .map(|row| Item::ok(row.name, row.passed, Value::String(row.detail)))
        .collect())
}

fn weights(s: &Scenario) -> Items {
    let w = s.weight.expect("validated").build()?;
    let mut items = vec![match check_conditions(&w, &default_a_grid(), &default_h_grid()) {
        Ok(r) => Item::ok(
            "conditions",
            r.all_hold(),
            serde_json::to_value(&r).expect("serializable"),
        ),
        Err(e) => Item::failed("conditions", e),
    }];
    let p_max = s.p_max.unwrap_or(DEFAULT_TAIL_P_MAX);
    for ell in s.ells() {
        let label = format!("tail_ell_{ell}");
        items.push(match estimate_tail_constants(&w, ell, p_max, s.tolerances.quad) {
            Ok(r) => {
                let holds = r.factorial.inequality_holds(r.factorial.constant)
                    && r.stirling.inequality_holds(r.stirling.constant);
                Item::ok(
                    label,
                    r.satisfied && holds,
                    json!({
                        "ell": ell,
                        "p_max": p_max,
                        "factorial_constant": r.factorial.constant,
                        "factorial_argmax": r.factorial.argmax,
                        "factorial_truncation": r.factorial.truncation_error_bound,
                        "stirling_constant": r.stirling.constant,
                        "stirling_argmax": r.stirling.argmax,
                        "stirling_truncation": r.stirling.truncation_error_bound,
                    }),
                )
            }
            Err(e) => Item::failed(label, e),
        });
    }
    Ok(items)
}

fn estimate_item(label: String, est: &LimitEstimate, tol: f64) -> Item {
    Item::ok(
        label,
        est.rel_error <= tol,
        json!({
            "method": est.method,
            "extrapolated": est.extrapolated,
            "predicted": est.predicted,
            "abs_error": est.abs_error,
            "rel_error": est.rel_error,
            "spread": est.spread,
            "decay_exponent": est.decay_exponent,
        }),
    )
    .with_ladder(est.rows())
}

fn limit(s: &Scenario) -> Items {
    let f = s.structure()?;
    let l = s.slowly_varying()?;
    let alpha = s.alpha.expect("validated");
    let ladder = s.ladder.expect("validated");
    let method = s.method();
    let tol = s.tolerances.quad;
    let model = match s.explicit_limit() {
        Some(m) => m,
        None => match structural_data(&f, alpha, &l, &ladder, method, tol).and_then(|d| d.limit()) {
            Ok(m) => m,
            Err(e) => return Ok(vec![Item::failed("limit", e)]),
        },
    };
    let mut items = vec![Item::ok(
        "limit",
        true,
        serde_json::to_value(&model).expect("serializable"),
    )];
    for (i, phi) in s.test_functions()?.iter().enumerate() {
        let label = format!("phi{i}");
        items.push(match quasi_limit(&f, &l, alpha, phi, &ladder, method, &model, tol) {
            Ok(est) => estimate_item(label, &est, s.tolerances.pass),
            Err(e) => Item::failed(label, e),
        });
    }
    Ok(items)
}

/// Ladder rows for a residual `r` measured against a known limit value.
fn residual_rows(points: impl Iterator<Item = (f64, f64)>, limit: f64) -> Vec<[f64; 5]> {
    points
        .map(|(scale, r)| {
            let abs = r.abs();
            let rel = if limit != 0.0 { abs / limit.abs() } else { abs };
            [scale, r + limit, limit, abs, rel]
        })
        .collect()
}

fn negint(s: &Scenario) -> Items {
    let f = s.structure()?;
    let f0 = &f.terms[0].coeff;
    let l = s.slowly_varying()?;
    let ladder = s.ladder.expect("validated");
    let (cp, cm) = (s.c0_plus.expect("validated"), s.c0_minus.expect("validated"));
    let model = ModelCombination::new()
        .with(cm, ModelDistribution::FinitePartMinus(1))
        .with(cp, ModelDistribution::FinitePartPlus(1));
    let mut items = Vec::new();
    for (i, phi) in s.test_functions()?.iter().enumerate() {
        let label = format!("phi{i}");
        let run = || -> qakit_core::Result<Item> {
            let r = negint_expansion_check(f0, &l, cp, cm, phi, &ladder, s.method(), s.tolerances.pass)?;
            let lim = model.pair(phi, s.tolerances.quad)?;
            let rows = residual_rows(r.points.iter().map(|p| (p.scale, p.residual)), lim);
            Ok(Item::ok(
                label.clone(),
                r.converged,
                json!({
                    "limit": lim,
                    "jumps": r.jumps,
                    "extrapolated_residual": r.extrapolated,
                    "decay_exponent": r.decay_exponent,
                }),
            )
            .with_ladder(rows))
        };
        items.push(run().unwrap_or_else(|e| Item::failed(label, e)));
    }
    Ok(items)
}

fn extension(s: &Scenario) -> Items {
    let f = s.structure()?;
    let l = s.slowly_varying()?;
    let ladder = s.ladder.expect("validated");
    let (alpha, c) = (s.alpha.expect("validated"), s.c.expect("validated"));
    let (kind, model) = match s.extension.clone().expect("validated") {
        ExtensionSpec::Positive => (
            ExtensionKind::NonIntegerPositive,
            ModelDistribution::HomogeneousPlus(alpha),
        ),
        ExtensionSpec::Negative { a } => (
            ExtensionKind::NonIntegerNegative { a },
            ModelDistribution::ContinuedPlus(alpha),
        ),
        ExtensionSpec::NegativeInteger { a0 } => (ExtensionKind::NegInt { a0 }, ModelDistribution::FinitePartPlus(1)),
    };
    let phis: Vec<TestFunction> = s.test_functions()?;
    let report = match extension_expansion(&f, &kind, alpha, c, &l, &phis, &ladder, s.tolerances.pass) {
        Ok(r) => r,
        Err(e) => return Ok(vec![Item::failed("extension", e)]),
    };
    let mut items = Vec::new();
    for (i, (phi, item)) in phis.iter().zip(&report.items).enumerate() {
        let label = format!("phi{i}");
        items.push(match model.pair(phi, s.tolerances.quad) {
            Ok(v) => {
                let lim = c * v;
                Item::ok(
                    label,
                    item.passed,
                    json!({
                        "limit": lim,
                        "last_abs_residual": item.last_abs_residual,
                        "decay_exponent": item.decay_exponent,
                        "recovered_a0": item.recovered_a0,
                    }),
                )
                .with_ladder(residual_rows(item.points.iter().map(|p| (p.scale, p.residual)), lim))
            }
            Err(e) => Item::failed(label, e),
        });
    }
    if let Some(dh) = &report.dehaan {
        items.push(Item::ok(
            "de_haan",
            dh.converged,
            json!({ "b_values": report.b_values, "report": dh }),
        ));
    }
    Ok(items)
}

fn zlocality(s: &Scenario) -> Items {
    let f = s.structure()?;
    let w = s.weight.expect("validated").build()?;
    let ladder = s.ladder.expect("validated");
    let n_cap = s.n_cap.expect("validated");
    let tol = s.tolerances.pass;
    let mut items = Vec::new();
    for (i, psi) in s.test_functions()?.iter().enumerate() {
        match qakit_core::qa::zspace_locality_check(&f, &w, psi, n_cap, &ladder, tol) {
            Ok(r) => {
                items.push(Item::ok(
                    format!("psi{i}_norm"),
                    r.psi_norm.value.is_finite(),
                    json!({ "inner_radius": r.inner_radius, "norm": r.psi_norm }),
                ));
                for row in &r.rows {
                    let last = row.values.last().map_or(f64::INFINITY, |p| p.residual.abs());
                    items.push(
                        Item::ok(format!("psi{i}_n{}", row.n), last <= tol, json!({ "last_abs": last }))
                            .with_ladder(residual_rows(row.values.iter().map(|p| (p.scale, p.residual)), 0.0)),
                    );
                }
            }
            Err(e) => items.push(Item::failed(format!("psi{i}"), e)),
        }
    }
    Ok(items)
}
