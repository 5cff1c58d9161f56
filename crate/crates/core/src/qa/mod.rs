//! Quasiasymptotic limits: predicted constants, ladder extrapolation and
//! the expansion and locality checks built on them.

pub mod checks;
pub mod constants;
pub mod ladder;

pub use checks::{
    derivative_consistency, differentiate, extension_expansion, locality_check, negint_expansion_check,
    primitive_shift, zspace_locality_check, ExtensionKind, ExtensionReport, LocalityReport, NegIntExpansionReport,
    ResidualPoint, ZLocalityReport,
};
pub use constants::{
    c_table_from_terms, gamma_ratio, predicted_constants_negint, predicted_constants_noninteger,
    predicted_constants_origin, structural_data, CEntry, StructuralData,
};
pub use ladder::{decay_exponent, extrapolate, quasi_limit, ratio_ladder, Ladder, LadderPoint, LimitEstimate, Method};
