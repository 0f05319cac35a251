//! Pseudo-spectral toolkit for space-time resonance analysis of the
//! quadratic Schroedinger equation in two dimensions.

pub mod baseline;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod field;
pub mod grid;
pub mod lp;
pub mod normal_form;
pub mod pseudo;
pub mod resonance;
pub mod smooth;
pub mod snapshot;
pub mod suites;
pub mod symbol;
pub mod testkit;

pub use error::{Error, Result};
pub use field::{Field, Repr};
pub use grid::Grid;

pub type C64 = num_complex::Complex64;
/// A point of the frequency plane.
pub type Freq = [f64; 2];
