//! Numerical toolkit for Schrödinger equations `u_t = (i P(D) + V) u` whose
//! principal symbol `P` is a homogeneous elliptic polynomial.
pub mod cli;
pub mod error;
pub mod exponents;
pub mod fft;
pub mod fit;
pub mod geometry;
pub mod kernel;
pub mod optimize;
pub mod potential;
pub mod quadrature;
pub mod spectral;
pub mod sphere;
pub mod symbol;

pub use error::{Error, Result};
pub use symbol::PolySymbol;
