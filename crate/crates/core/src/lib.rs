//! Grothendieck d-norms of symmetric, Hermitian and rectangular matrices.
//!
//! The crate computes ‖A‖_{γ,d}, ‖A‖_{Γ,d} and ‖B‖_{G,d} by low-rank Gram
//! factor ascent, the d = 1 quantities θ and Θ exactly by enumeration on small
//! instances, and the special functions and constants that bound their ratios.

pub mod apps;
pub mod closed_form;
pub mod error;
pub mod gram;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod rounding;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
pub use matrix::{ConeLabel, Field, RectMatrix, SymMatrix, C64};
