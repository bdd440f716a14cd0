//! Sectoriality toolkit: numerical ranges, coefficient-field sector angles,
//! Galerkin discretizations, sectorial functional calculus and p-form checks.

pub mod numkernel;
pub mod range;
pub mod field;
pub mod fem;
pub mod calculus;
pub mod pform;
pub mod oracle;
pub mod acceptance;

mod util;
