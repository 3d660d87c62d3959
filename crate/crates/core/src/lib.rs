//! Simulation of the direct measurement of a transverse wavefunction: a weak
//! polarization rotation at one position, post-selection on zero transverse
//! momentum behind a Fourier lens, and a Pauli readout of the pointer whose
//! real and imaginary parts are proportional to the wavefunction.
//!
//! Units are mm for positions and rad/mm for transverse wavenumbers. The
//! momentum convention is `<x|k> = exp(+i k x) / sqrt(2 pi)` everywhere.

pub mod analysis;
pub mod counting;
pub mod engine;
pub mod error;
pub mod par;
pub mod scenario;
pub mod state;

pub use error::{Error, Result};
pub use num_complex::Complex64;
