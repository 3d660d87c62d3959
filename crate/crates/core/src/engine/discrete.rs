//! The finite-dimensional protocol: weakly measure `pi_a = |a><a|`,
//! post-select on `|b0>` from a basis unbiased with respect to `{|a>}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{BasisPair, DiscreteState, ZERO_NORM};

/// `<b0|a><a|psi> / <b0|psi>`.
pub fn discrete_weak_value(psi: &DiscreteState, pair: &BasisPair, a: usize, b0: usize) -> Result<Complex64> {
    let n = pair.dim();
    if psi.dim() != n {
        return Err(Error::SpecMismatch);
    }
    for idx in [a, b0] {
        if idx >= n {
            return Err(Error::BinOutOfRange { index: idx, len: n });
        }
    }
    let denom = pair.b_component(b0, psi);
    if denom.norm() < ZERO_NORM {
        return Err(Error::NullPostSelection(denom.norm_sqr()));
    }
    Ok(pair.overlap(b0, a) * pair.a_component(a, psi) / denom)
}

/// Weak values for every `a`, post-selected on `b0`.
pub fn discrete_profile(psi: &DiscreteState, pair: &BasisPair, b0: usize) -> Result<Vec<Complex64>> {
    (0..pair.dim()).map(|a| discrete_weak_value(psi, pair, a, b0)).collect()
}

/// Rebuilds `|psi>` from a complete weak-value profile. Each weak value is
/// divided by `<b0|a>`, which is a common constant when the overlaps with
/// `b0` share one phase and otherwise undoes the `a`-dependent phase.
pub fn reconstruct_discrete(profile: &[Complex64], pair: &BasisPair, b0: usize) -> Result<DiscreteState> {
    let n = pair.dim();
    if profile.len() != n {
        return Err(Error::SpecMismatch);
    }
    if b0 >= n {
        return Err(Error::BinOutOfRange { index: b0, len: n });
    }
    if profile.iter().all(|w| w.norm() < ZERO_NORM) {
        return Err(Error::DegenerateProfile);
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut amps = vec![zero; n];
    for (a, w) in profile.iter().enumerate() {
        let coeff = w / pair.overlap(b0, a);
        for (slot, basis) in amps.iter_mut().zip(&pair.basis_a()[a]) {
            *slot += coeff * basis;
        }
    }
    DiscreteState::new(amps)?.normalize()
}
