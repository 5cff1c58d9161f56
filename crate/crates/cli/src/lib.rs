//! Scenario runner: strict TOML scenarios in, JSON and CSV reports out.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod output;
pub mod run;
pub mod scenario;

pub use output::{resolve_out_dir, write_report};
pub use run::{run_scenario, Item, Report};
pub use scenario::{parse_scenario, parse_str, Scenario, ScenarioError, ScenarioKind};
