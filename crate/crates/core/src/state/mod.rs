//! Gridded and finite-dimensional state vectors.

mod discrete;
mod grid;
mod io;

pub use discrete::{fourier_mub, BasisPair, DiscreteState};
pub use grid::{momentum_transform, GridSpec, GridState, Representation};
pub use io::{read_state_csv, write_state_csv};

use num_complex::Complex64;

/// Norm threshold below which a state is treated as the zero vector.
pub const ZERO_NORM: f64 = 1e-30;

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}
