//! Sharp constants for critical Sobolev and Gagliardo-Nirenberg type
//! inequalities on flat tori: lattice sums, extremal curves, remainder
//! constants and their large-order limits.

pub mod algebraic;
pub mod bounds;
pub mod curve;
pub mod error;
pub mod field;
pub mod largen;
pub mod lattice;
pub mod optimize;
pub mod specfun;

pub use error::{Error, Result};
pub use lattice::{CaseDN, Method, PrecisionConfig, SumTriple};
pub use specfun::SpecialValue;
