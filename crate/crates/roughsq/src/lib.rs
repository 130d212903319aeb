//! Rough square functions on the line.
//!
//! The crate evaluates the square function
//!
//! S_α f(x) = (∬ |Δ_s f(x)/s − Δ_t f(x)/t|² |s − t|^{−2α} ds dt)^{1/2},
//!
//! its Marcinkiewicz-type relatives, the spectral Riesz derivative it is
//! compared against, the quadratic symmetrization of the Calderón commutator
//! kernel, and a set of experiments that check the known inequalities and
//! counterexamples numerically.

pub mod error;
pub mod fnspace;
pub mod fractional;
pub mod numerics;
pub mod spectral;
pub mod sqfun;
pub mod symm;
pub mod verify;
pub mod zoo;

pub use error::{Error, Result};
