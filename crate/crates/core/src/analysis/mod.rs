//! From weak-value profiles to physics: phases, fitted phase coefficients
//! and comparisons with strong-measurement ground truth.

mod compare;
mod fit;
mod phase;

pub use compare::{
    compare_expectation_profile, compare_probability, reconstruction_fidelity, write_reconstruction_csv,
    ProbabilityReport,
};
pub use fit::{fit_linear_phase, fit_polynomial, fit_quadratic_phase, linear_regression, FitResult};
pub use phase::{extract_phase, extract_phase_with_floor, phase_difference, PhaseProfile, DEFAULT_MAGNITUDE_FLOOR};
