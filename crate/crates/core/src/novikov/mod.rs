//! Homological algebra over the nonnegative Novikov ring.
//!
//! - Formal series in a parameter `T` with rational exponents and rational
//!   coefficients, with exact arithmetic throughout — no floating point.
//! - Matrices, diagonalization, and kernel computations over the series
//!   ring, plus the truncated quotients where units become honestly
//!   invertible.
//! - Finitely presented modules with computable invariants (torsion
//!   exponents and free rank), map checks, images, and inverse-system
//!   stabilization verdicts.
//! - Cochain complexes with homology in both the full and the truncated
//!   coefficients, presented both by invariant formulas and by explicit
//!   generators and relations, with transition maps between levels.
//! - Mapping telescopes of rays of complexes and the relative-versus-
//!   reduced comparison report.

mod complex;
mod matrix;
mod module;
mod series;
mod smith;
mod telescope;
mod truncated;

pub use complex::{
    truncation_transition, NovikovComplex, PresentedTruncatedHomology, UctReport,
};
pub use matrix::NovikovMatrix;
pub use module::{
    image_module, is_surjective_map, is_well_defined_map, mittag_leffler, FPModule,
    InverseSystem, ModuleInvariants, TorsionBound,
};
pub use series::NovikovElement;
pub use smith::{
    determinant, in_column_span, kernel_basis, smith_exponents_oracle, smith_form,
    SmithForm,
};
pub use telescope::{
    rel_vs_red, telescope, ChainMap, OneRay, RelVsRedReport, TruncatedSample,
};
pub use truncated::{
    invert_unit_mod, smith_form_mod, truncated_kernel, TruncatedKernel, TruncatedSmith,
};
