//! Numerical laboratory for a Stolzenberg-type compact set in `C* x C`.
//!
//! The crate builds the two planar boundary curves and the totally real
//! disks over them ([`geometry`]), evaluates monomial and Laurent bases
//! ([`polybasis`]), decides finite-degree hull questions with a dense
//! simplex solver ([`lp`], [`hull`]) and runs the automorphism dynamics that
//! turn a basin of attraction into a non-Runge Fatou-Bieberbach domain
//! ([`autom`]).

pub mod autom;
pub mod geometry;
pub mod hull;
pub mod lp;
pub mod polybasis;

pub use num_complex::Complex64 as C64;

pub use geometry::ComplexPoint;
