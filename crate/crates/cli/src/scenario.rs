//! Scenario files: strict TOML with one table per experiment.
//!
//! Every key is checked; typos are fatal. Fields that only some kinds need
//! are optional at the syntax level and enforced by [`Scenario::validate`],
//! which reports every violation at once.

use std::fmt;
use std::path::Path;

use qakit_core::gfun::{CoeffFn, Cut, ModelCombination, ModelDistribution, StructuredUD, TestFnKind, TestFunction};
use qakit_core::qa::{Ladder, Method};
use qakit_core::svf::{Locus, SlowlyVaryingFn};
use qakit_core::weights::WeightSequence;
use serde::{Deserialize, Serialize};

pub const DEFAULT_M_MAX: usize = 12;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const DEFAULT_PASS_TOL: f64 = 1e-3;
pub const DEFAULT_P_MAX: usize = 64;
pub const DEFAULT_ELLS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    CombVerify,
    WeightsVerify,
    QuasiLimit,
    NegintExpansion,
    Extension,
    Zlocality,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::CombVerify => "comb_verify",
            ScenarioKind::WeightsVerify => "weights_verify",
            ScenarioKind::QuasiLimit => "quasi_limit",
            ScenarioKind::NegintExpansion => "negint_expansion",
            ScenarioKind::Extension => "extension",
            ScenarioKind::Zlocality => "zlocality",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub gevrey: f64,
    #[serde(default = "default_p_max")]
    pub p_max: usize,
}

fn default_p_max() -> usize {
    DEFAULT_P_MAX
}

impl WeightSpec {
    pub fn build(&self) -> qakit_core::Result<WeightSequence> {
        WeightSequence::gevrey(self.gevrey, self.p_max)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CutSpec {
    #[default]
    None,
    SmoothInner {
        radius: f64,
    },
    SharpInner {
        radius: f64,
    },
    SmoothOuter {
        radius: f64,
    },
    SharpOuter {
        radius: f64,
    },
}

impl CutSpec {
    fn is_none(&self) -> bool {
        *self == CutSpec::None
    }

    fn build(self) -> Cut {
        match self {
            CutSpec::None => Cut::None,
            CutSpec::SmoothInner { radius } => Cut::SmoothInner(radius),
            CutSpec::SharpInner { radius } => Cut::SharpInner(radius),
            CutSpec::SmoothOuter { radius } => Cut::SmoothOuter(radius),
            CutSpec::SharpOuter { radius } => Cut::SharpOuter(radius),
        }
    }
}

/// A coefficient function. `svf` defaults to the scenario's `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoeffSpec {
    /// `c_+ y^power L(y)` for `y > 0` and `left_sign c_- |y|^power L(|y|)`
    /// for `y < 0`. Without `left_sign` the structural convention applies:
    /// `(-1)^|power|` for integer powers and `(-1)^order` otherwise.
    Power {
        c_plus: f64,
        c_minus: f64,
        power: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        left_sign: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        svf: Option<String>,
        #[serde(default, skip_serializing_if = "CutSpec::is_none")]
        cut: CutSpec,
    },
    Poly {
        coeffs: Vec<f64>,
        support: [f64; 2],
    },
    Bump {
        amplitude: f64,
        center: f64,
        radius: f64,
    },
    OriginPrimitive {
        c1: f64,
        c2: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        svf: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub order: usize,
    pub coeff: CoeffSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub order: usize,
    pub amplitude: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitPart {
    pub coeff: f64,
    pub model: ModelDistribution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExtensionSpec {
    Positive,
    Negative { a: Vec<f64> },
    NegativeInteger { a0: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Target for every quadrature.
    #[serde(default = "default_quad_tol")]
    pub quad: f64,
    /// Per-item pass threshold.
    #[serde(default = "default_pass_tol")]
    pub pass: f64,
}

fn default_quad_tol() -> f64 {
    DEFAULT_QUAD_TOL
}

fn default_pass_tol() -> f64 {
    DEFAULT_PASS_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quad: DEFAULT_QUAD_TOL,
            pass: DEFAULT_PASS_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locus: Option<Locus>,
    /// Slowly varying function, e.g. `"1"`, `"log"`, `"log^2 * loglog"`.
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub svf: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    /// `l` values for the weight tail estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ells: Option<Vec<f64>>,
    /// Largest `p` in the weight tail estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0_minus: Option<f64>,
    /// Leading constant of the extension checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Ladder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtensionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_functions: Vec<TestFnKind>,
    /// Explicit limit; derived from the term metadata when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<Vec<LimitPart>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Syntax { path: String, message: String },
    #[error("{}", Violations(.0))]
    Invalid(Vec<String>),
}

struct Violations<'a>(&'a [String]);

impl fmt::Display for Violations<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid scenario ({} problem{})",
            self.0.len(),
            if self.0.len() == 1 { "" } else { "s" }
        )?;
        for v in self.0 {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let scenario = parse_str(&text).map_err(|e| match e {
        ScenarioError::Syntax { message, .. } => ScenarioError::Syntax {
            path: path.display().to_string(),
            message,
        },
        other => other,
    })?;
    Ok(scenario)
}

/// Parses and validates scenario text.
pub fn parse_str(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Syntax {
        path: "<input>".into(),
        message: e.to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

fn parse_svf(text: &str, locus: Locus) -> Result<SlowlyVaryingFn, String> {
    SlowlyVaryingFn::parse(text, locus).map_err(|e| e.to_string())
}

fn parity(n: u64) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl Scenario {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn locus_or_default(&self) -> Locus {
        self.locus.unwrap_or(Locus::Infinity)
    }

    pub fn m_max(&self) -> usize {
        self.m_max.unwrap_or(DEFAULT_M_MAX)
    }

    pub fn ells(&self) -> Vec<f64> {
        self.ells.clone().unwrap_or_else(|| DEFAULT_ELLS.to_vec())
    }

    pub fn method(&self) -> Method {
        self.method.unwrap_or(Method::PlainLast)
    }

    /// Checks kind-specific requirements and every value that can be
    /// checked without running anything.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut v = Vec::new();
        let mut need = |present: bool, field: &str| {
            if !present {
                v.push(format!(
                    "missing field `{field}` required by kind `{}`",
                    self.kind.name()
                ));
            }
        };
        match self.kind {
            ScenarioKind::CombVerify => {}
            ScenarioKind::WeightsVerify => need(self.weight.is_some(), "weight"),
            ScenarioKind::QuasiLimit => {
                need(self.alpha.is_some(), "alpha");
                need(self.ladder.is_some(), "ladder");
                need(!self.terms.is_empty() || !self.points.is_empty(), "terms");
                need(!self.test_functions.is_empty(), "test_functions");
            }
            ScenarioKind::NegintExpansion => {
                need(self.c0_plus.is_some(), "c0_plus");
                need(self.c0_minus.is_some(), "c0_minus");
                need(self.ladder.is_some(), "ladder");
                need(!self.terms.is_empty(), "terms");
                need(!self.test_functions.is_empty(), "test_functions");
            }
            ScenarioKind::Extension => {
                need(self.alpha.is_some(), "alpha");
                need(self.c.is_some(), "c");
                need(self.extension.is_some(), "extension");
                need(self.ladder.is_some(), "ladder");
                need(!self.terms.is_empty(), "terms");
                need(!self.test_functions.is_empty(), "test_functions");
            }
            ScenarioKind::Zlocality => {
                need(self.weight.is_some(), "weight");
                need(self.n_cap.is_some(), "n_cap");
                need(self.ladder.is_some(), "ladder");
                need(!self.test_functions.is_empty(), "test_functions");
            }
        }

        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            v.push(format!(
                "`name` must be non-empty ASCII letters, digits, `-` or `_`, got {:?}",
                self.name
            ));
        }
        for (key, tol) in [
            ("tolerances.quad", self.tolerances.quad),
            ("tolerances.pass", self.tolerances.pass),
        ] {
            if !(tol > 0.0 && tol.is_finite()) {
                v.push(format!("`{key}` must be positive and finite, got {tol}"));
            }
        }
        let locus = self.locus_or_default();
        if self.kind == ScenarioKind::Zlocality && self.locus.is_some_and(|l| l != Locus::Origin) {
            v.push("`locus` must be `origin` for kind `zlocality`".into());
        }
        if let Some(ladder) = &self.ladder {
            if let Err(e) = ladder.validate() {
                v.push(format!("`ladder`: {e}"));
            } else {
                let expected = if self.kind == ScenarioKind::Zlocality {
                    Locus::Origin
                } else {
                    locus
                };
                if ladder.locus() != expected {
                    v.push(format!(
                        "`ladder` runs toward {:?} but the scenario locus is {expected:?}",
                        ladder.locus()
                    ));
                }
            }
        }
        if let Some(text) = &self.svf {
            if let Err(e) = parse_svf(text, locus) {
                v.push(format!("`L`: {e}"));
            }
        }
        if let Some(w) = &self.weight {
            if let Err(e) = w.build() {
                v.push(format!("`weight`: {e}"));
            }
        }
        if let Some(ells) = &self.ells {
            if ells.is_empty() || ells.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                v.push("`ells` must be a non-empty list of positive numbers".into());
            }
        }
        if self.kind == ScenarioKind::Extension && locus != Locus::Infinity {
            v.push("kind `extension` runs at infinity".into());
        }
        if self.kind == ScenarioKind::NegintExpansion && (self.terms.len() != 1 || self.terms[0].order != 0) {
            v.push("kind `negint_expansion` takes exactly one term of order 0 (the coefficient f0)".into());
        }
        for (i, t) in self.terms.iter().enumerate() {
            match self.build_coeff(t) {
                Ok(c) => {
                    if let Err(e) = c.validate() {
                        v.push(format!("`terms[{i}]`: {e}"));
                    }
                }
                Err(e) => v.push(format!("`terms[{i}]`: {e}")),
            }
        }
        for (i, k) in self.test_functions.iter().enumerate() {
            if let Err(e) = TestFunction::new(k.clone(), qakit_core::gfun::DEFAULT_MAX_ORDER) {
                v.push(format!("`test_functions[{i}]`: {e}"));
            }
        }
        if let Some(parts) = &self.limit {
            for (i, p) in parts.iter().enumerate() {
                if let Err(e) = p.model.validate() {
                    v.push(format!("`limit[{i}]`: {e}"));
                }
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid(v))
        }
    }

    pub fn slowly_varying(&self) -> qakit_core::Result<SlowlyVaryingFn> {
        SlowlyVaryingFn::parse(self.svf.as_deref().unwrap_or("1"), self.locus_or_default())
    }

    fn build_coeff(&self, t: &TermSpec) -> Result<CoeffFn, String> {
        let locus = self.locus_or_default();
        let svf = |own: &Option<String>| parse_svf(own.as_deref().or(self.svf.as_deref()).unwrap_or("1"), locus);
        Ok(match &t.coeff {
            CoeffSpec::Power {
                c_plus,
                c_minus,
                power,
                left_sign,
                svf: own,
                cut,
            } => {
                let default_sign = if power.fract() == 0.0 {
                    parity(power.abs() as u64)
                } else {
                    parity(t.order as u64)
                };
                CoeffFn::Power {
                    c_plus: *c_plus,
                    c_minus: *c_minus,
                    power: *power,
                    left_sign: left_sign.unwrap_or(default_sign),
                    svf: svf(own)?,
                    cut: cut.build(),
                }
            }
            CoeffSpec::Poly { coeffs, support } => CoeffFn::Poly {
                coeffs: coeffs.clone(),
                support: (support[0], support[1]),
            },
            CoeffSpec::Bump {
                amplitude,
                center,
                radius,
            } => CoeffFn::Bump {
                amplitude: *amplitude,
                center: *center,
                radius: *radius,
            },
            CoeffSpec::OriginPrimitive { c1, c2, svf: own } => CoeffFn::OriginPrimitive {
                c1: *c1,
                c2: *c2,
                svf: svf(own)?,
            },
        })
    }

    /// The structured distribution described by `terms` and `points`.
    pub fn structure(&self) -> qakit_core::Result<StructuredUD> {
        let mut f = StructuredUD::new(self.locus_or_default());
        for t in &self.terms {
            let coeff = self.build_coeff(t).map_err(|reason| qakit_core::Error::SvfSpec {
                spec: self.svf.clone().unwrap_or_default(),
                reason,
            })?;
            f = f.with_term(t.order, coeff);
        }
        for p in &self.points {
            f = f.with_point(p.order, p.amplitude);
        }
        Ok(f)
    }

    pub fn test_functions(&self) -> qakit_core::Result<Vec<TestFunction>> {
        self.test_functions
            .iter()
            .map(|k| TestFunction::new(k.clone(), qakit_core::gfun::DEFAULT_MAX_ORDER))
            .collect()
    }

    pub fn explicit_limit(&self) -> Option<ModelCombination> {
        self.limit.as_ref().map(|parts| {
            parts
                .iter()
                .fold(ModelCombination::new(), |m, p| m.with(p.coeff, p.model))
        })
    }
}
