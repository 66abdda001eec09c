//! Numerics for the random-field Hartree equation around translation-invariant
//! Fermi-type steady states: momentum distributions and their transforms, the
//! linear-response symbol with its stability criteria, a spectral mode solver
//! for perturbations, and the discrete norms used to report on all of them.

pub mod distributions;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod norms;
pub mod quadrature;
pub mod response;
pub mod special;
pub mod spline;

pub use error::{Error, Result};
