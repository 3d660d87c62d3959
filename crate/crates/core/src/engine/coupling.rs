use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::GridState;

/// Strength and location of the weak position measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    /// Polarization rotation angle in radians, in `[0, pi/2]`.
    pub phi: f64,
    pub bin_index: usize,
    /// Multiplicative reduction of the pointer expectations, in `(0, 1]`.
    pub visibility: f64,
}

impl CouplingConfig {
    pub fn new(phi: f64, bin_index: usize) -> Self {
        CouplingConfig {
            phi,
            bin_index,
            visibility: 1.0,
        }
    }

    pub fn validate(&self, n_bins: usize) -> Result<()> {
        if !(0.0..=FRAC_PI_2).contains(&self.phi) {
            return Err(Error::param("phi", format!("{} rad outside [0, pi/2]", self.phi)));
        }
        check_visibility(self.visibility)?;
        if self.bin_index >= n_bins {
            return Err(Error::BinOutOfRange {
                index: self.bin_index,
                len: n_bins,
            });
        }
        Ok(())
    }
}

pub(crate) fn check_visibility(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("visibility", format!("{eta} outside (0, 1]")))
    }
}

/// System-pointer state right after the coupling:
/// `sum_x psi(x)|x>|V>`, except that the pointer at `x_bin` is rotated to
/// `cos(phi)|V> + sin(phi)|H>`.
///
/// Only the rotated bin differs from the product state, so the joint state
/// borrows the system state instead of copying it.
#[derive(Debug, Clone, Copy)]
pub struct JointState<'a> {
    state: &'a GridState,
    bin: usize,
    phi: f64,
}

impl<'a> JointState<'a> {
    pub fn state(&self) -> &'a GridState {
        self.state
    }

    pub fn bin(&self) -> usize {
        self.bin
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `(H, V)` amplitudes at grid position `i`.
    pub fn amplitude(&self, i: usize) -> (Complex64, Complex64) {
        let psi = self.state.amplitudes()[i];
        if i == self.bin {
            (psi * self.phi.sin(), psi * self.phi.cos())
        } else {
            (Complex64::new(0.0, 0.0), psi)
        }
    }

    /// Fully expanded `(H, V)` component vectors.
    pub fn to_dense(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        (0..self.state.len()).map(|i| self.amplitude(i)).unzip()
    }

    pub fn norm_sqr(&self) -> f64 {
        let dx = self.state.measure();
        (0..self.state.len())
            .map(|i| {
                let (h, v) = self.amplitude(i);
                (h.norm_sqr() + v.norm_sqr()) * dx
            })
            .sum()
    }
}

pub fn couple<'a>(state: &'a GridState, cfg: &CouplingConfig) -> Result<JointState<'a>> {
    cfg.validate(state.len())?;
    Ok(JointState {
        state,
        bin: cfg.bin_index,
        phi: cfg.phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::GridSpec;

    fn state() -> GridState {
        let spec = GridSpec::centered(64, 4.0).unwrap();
        GridState::from_fn(spec, |x| Complex64::from_polar((-x * x).exp(), 0.4 * x))
            .normalize()
            .unwrap()
    }

    #[test]
    fn zero_coupling_is_product() {
        let s = state();
        let j = couple(&s, &CouplingConfig::new(0.0, 30)).unwrap();
        let (h, v) = j.to_dense();
        assert!(h.iter().all(|z| z.norm() == 0.0));
        assert_eq!(v, s.amplitudes());
    }

    #[test]
    fn coupling_preserves_norm() {
        let s = state();
        let j = couple(&s, &CouplingConfig::new(0.1, 31)).unwrap();
        assert!((j.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bin_out_of_range() {
        let s = state();
        assert!(matches!(
            couple(&s, &CouplingConfig::new(0.1, 64)),
            Err(Error::BinOutOfRange { .. })
        ));
        assert!(couple(&s, &CouplingConfig::new(-0.1, 3)).is_err());
    }
}
