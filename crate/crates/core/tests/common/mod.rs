#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakwave::engine::PostSelection;
use weakwave::scenario::{prepare, OpticalParams, Scenario};
use weakwave::state::{DiscreteState, GridSpec, GridState};
use weakwave::Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random normalized state with complex Gaussian-ish amplitudes under a
/// smooth envelope, so that every post-selection overlap is generic.
pub fn random_grid_state(rng: &mut ChaCha8Rng, spec: GridSpec) -> GridState {
    let half = 0.5 * (spec.x_max() - spec.x_min());
    let amps = (0..spec.n_points())
        .map(|i| {
            let x = spec.x(i);
            let env = (-(x * x) / (0.25 * half * half)).exp() + 0.05;
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * env
                + Complex64::new(env, 0.0)
        })
        .collect();
    GridState::new(spec, amps).unwrap().normalize().unwrap()
}

pub fn random_discrete_state(rng: &mut ChaCha8Rng, dim: usize) -> DiscreteState {
    let amps = (0..dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    DiscreteState::new(amps).unwrap().normalize().unwrap()
}

pub fn random_postselection(rng: &mut ChaCha8Rng, spec: &GridSpec) -> PostSelection {
    let dk = spec.dk();
    match rng.random_range(0..3) {
        0 => PostSelection::point(rng.random_range(-3.0..3.0) * dk),
        1 => PostSelection::window(rng.random_range(-3.0..3.0) * dk, rng.random_range(1.0..8.0) * dk),
        _ => PostSelection::None,
    }
}

/// Fig. 1 preparation on the acceptance grid: 2048 points over [-32, 32) mm.
pub fn reference_grid() -> GridSpec {
    GridSpec::centered(2048, 32.0).unwrap()
}

pub fn reference_gaussian() -> GridState {
    prepare(&Scenario::truncated_gaussian(OpticalParams::default()), &reference_grid()).unwrap()
}

/// Scaled-down bench (6 mm aperture) that fits on oracle-sized grids.
pub fn small_optics() -> OpticalParams {
    OpticalParams {
        aperture_width_mm: 6.0,
        gauss_diameter_mm: 8.0,
        ..OpticalParams::default()
    }
}
