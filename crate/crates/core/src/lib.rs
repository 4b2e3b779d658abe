//! Numerical laboratory for Steklov (Dirichlet-to-Neumann) eigenfunctions on
//! planar real-analytic domains.
//!
//! The pipeline is: build a [`geometry::Domain`], discretize its layer
//! potentials ([`dtn::assemble_layers`]), solve for eigenpairs
//! ([`dtn::steklov_solve`]), extend them harmonically into the interior
//! ([`extension::ExtensionField`]), then measure their decay along normal
//! rays ([`decay`]) and their phase-space concentration ([`fbi`]).
//! [`reference`] holds the closed-form disk, annulus and cylinder oracles.

// Negated comparisons are used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decay;
pub mod dtn;
pub mod error;
pub mod extension;
pub mod fbi;
pub mod field;
pub mod fourier;
pub mod geometry;
pub mod reference;

pub use error::{Error, Result};
pub use field::SteklovField;
