//! Eigenray diagram calculus.
//!
//! Exact piecewise-linear diagrams in the rational plane, the nodal integral
//! affine structures they induce, Novikov-coefficient homological algebra, and
//! polygon-valued valuation algebras, together with floating-point checks of
//! the associated local models.

pub mod affine;
pub mod atlas;
pub mod diagram;
pub mod error;
pub mod exact;
pub mod ks;
pub mod local;
pub mod novikov;
pub mod render;
pub mod sample;
pub mod script;

pub use error::{Error, Result};
