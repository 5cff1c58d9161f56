// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comb;
pub mod error;
pub mod gfun;
pub mod qa;
pub mod quad;
pub mod svf;
pub mod weights;

pub use error::{Error, Result};
pub use gfun::{CoeffFn, Cut, ModelDistribution, StructuredUD, TestFunction};
pub use svf::{Locus, SlowlyVaryingFn, SvfSpec};
pub use weights::WeightSequence;
