//! Relativistic electron spin in finite plane-wave laser pulses.
//!
//! The crate propagates a Gaussian Dirac wave packet through a linearly
//! polarized sin²-envelope pulse by expansion in Volkov states, evaluates the
//! mean spin with several relativistic spin operators, and compares the result
//! with classical Larmor and T-BMT precession.
//!
//! Atomic units are used throughout: ħ = m = |e| = 1, the electron charge is
//! −1 and `c` defaults to [`pulse::SPEED_OF_LIGHT`].

pub mod algebra;
pub mod classical;
pub mod dirac;
pub mod error;
pub mod experiment;
pub mod numerics;
pub mod pulse;
pub mod runner;
pub mod spin;
pub mod verify;

pub use error::{Error, Result};
