//! Test functions, model distributions and structured distributions.

pub mod model;
pub mod structured;
pub mod testfn;
pub mod znorm;

pub use model::{half_line, pair_inverse_power, ModelCombination, ModelDistribution};
pub use structured::{dilate_pair, pair_structured, smooth_step, CoeffFn, Cut, PointTerm, StructuredUD, Term};
pub use testfn::{TestFnKind, TestFunction, DEFAULT_MAX_ORDER};
pub use znorm::{zspace_norm, ZNorm};
