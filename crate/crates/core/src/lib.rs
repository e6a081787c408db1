//! Chebyshev polynomials of compact sets in the plane, together with the
//! potential theory that normalizes them: capacity, Green's functions,
//! equilibrium measures, Widom factors and zero distributions.

pub mod cheb_complex;
pub mod cheb_real;
pub mod error;
pub mod numerics;
pub mod potential;
pub mod sets;
pub mod verify;
pub mod zeros;

pub use error::{Error, Result};
pub use numerics::poly::C64;
