use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coupling::{check_visibility, couple, CouplingConfig};
use super::postselect::{PostSelection, Postselector};
use super::readout::{pointer_readout, ROTATION_GAIN};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Strategy};
use crate::state::{GridSpec, GridState, ZERO_NORM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinFlag {
    Ok,
    /// Nothing passed the slit; the weak value is undefined here.
    NullPostSelection,
}

impl BinFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            BinFlag::Ok => "ok",
            BinFlag::NullPostSelection => "null_postselection",
        }
    }
}

/// Parameters a profile was measured with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub phi: f64,
    pub postselection: PostSelection,
    pub visibility: f64,
}

impl ScanSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0 && self.phi < FRAC_PI_2) {
            return Err(Error::param("phi", format!("need 0 < phi < pi/2, got {} rad", self.phi)));
        }
        check_visibility(self.visibility)?;
        self.postselection.validate()
    }
}

/// Weak value of `pi_x` per grid bin, as a density in 1/mm: summing
/// `values * dx` over a complete scan gives `sum_x <pi_x>_W = 1` in the weak
/// limit (times the visibility).
#[derive(Debug, Clone, PartialEq)]
pub struct WeakValueProfile {
    pub spec: GridSpec,
    pub values: Vec<Complex64>,
    pub postselect_prob: Vec<f64>,
    pub flags: Vec<BinFlag>,
    pub settings: ScanSettings,
}

impl WeakValueProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_valid(&self, bin: usize) -> bool {
        self.flags[bin] == BinFlag::Ok
    }

    pub fn flagged_count(&self) -> usize {
        self.flags.iter().filter(|f| **f != BinFlag::Ok).count()
    }

    /// `sum values * dx` over valid bins.
    pub fn total(&self) -> Complex64 {
        let dx = self.spec.dx();
        self.valid_values().map(|(_, z)| z * dx).sum()
    }

    pub fn valid_values(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.is_valid(*i))
            .map(|(i, z)| (i, *z))
    }

    /// Unnormalized wavefunction estimate, flagged bins set to zero.
    pub fn to_state(&self) -> Result<GridState> {
        let amps = self
            .values
            .iter()
            .zip(&self.flags)
            .map(|(z, f)| if *f == BinFlag::Ok { *z } else { Complex64::new(0.0, 0.0) })
            .collect();
        GridState::new(self.spec, amps)
    }

    /// Normalized reconstruction of the measured wavefunction.
    pub fn reconstruct(&self) -> Result<GridState> {
        self.to_state()?.normalize()
    }

    /// CSV with columns `x_mm,re_wv,im_wv,pass_prob,flag`.
    pub fn write_csv<W: Write>(&self, comments: &[String], mut out: W) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "x_mm,re_wv,im_wv,pass_prob,flag")?;
        for i in 0..self.len() {
            let z = self.values[i];
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{}",
                self.spec.x(i),
                z.re,
                z.im,
                self.postselect_prob[i],
                self.flags[i].as_str()
            )?;
        }
        Ok(())
    }
}

/// One bin of a scan: couple, post-select, read out.
fn scan_bin(
    state: &GridState,
    selector: &Postselector<'_>,
    settings: &ScanSettings,
    bin: usize,
) -> Result<(Complex64, f64)> {
    let cfg = CouplingConfig {
        phi: settings.phi,
        bin_index: bin,
        visibility: settings.visibility,
    };
    let joint = couple(state, &cfg)?;
    let (pointer, pass) = selector.apply(&joint)?;
    let readout = pointer_readout(&pointer, settings.phi, settings.visibility)?;
    Ok((readout / (ROTATION_GAIN * state.spec().dx()), pass))
}

/// Scans the weak measurement across every grid bin (fresh ensemble per bin).
pub fn scan_weak_values(
    state: &GridState,
    phi: f64,
    ps: &PostSelection,
    visibility: f64,
) -> Result<WeakValueProfile> {
    scan_weak_values_with(Strategy::default(), state, phi, ps, visibility)
}

pub fn scan_weak_values_with(
    strategy: Strategy,
    state: &GridState,
    phi: f64,
    ps: &PostSelection,
    visibility: f64,
) -> Result<WeakValueProfile> {
    let settings = ScanSettings {
        phi,
        postselection: *ps,
        visibility,
    };
    settings.validate()?;
    let selector = Postselector::new(state, ps)?;
    let bins = map_indexed(strategy, state.len(), |b| scan_bin(state, &selector, &settings, b));
    let n = state.len();
    let mut values = Vec::with_capacity(n);
    let mut probs = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for r in bins {
        match r {
            Ok((v, p)) => {
                values.push(v);
                probs.push(p);
                flags.push(BinFlag::Ok);
            }
            Err(Error::NullPostSelection(p)) => {
                values.push(Complex64::new(0.0, 0.0));
                probs.push(p);
                flags.push(BinFlag::NullPostSelection);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(WeakValueProfile {
        spec: *state.spec(),
        values,
        postselect_prob: probs,
        flags,
        settings,
    })
}

/// Zero-coupling weak value density `<k0|x> psi(x) / <k0|psi>`, i.e.
/// `exp(-i k0 x) psi(x) / (sqrt(2 pi) Phi(k0))`.
pub fn analytic_weak_value(state: &GridState, bin: usize, k0: f64) -> Result<Complex64> {
    if bin >= state.len() {
        return Err(Error::BinOutOfRange {
            index: bin,
            len: state.len(),
        });
    }
    analytic_with(state, state.momentum_amplitude(k0), bin, k0)
}

fn analytic_with(state: &GridState, phi0: Complex64, bin: usize, k0: f64) -> Result<Complex64> {
    if phi0.norm() < ZERO_NORM {
        return Err(Error::NullPostSelection(phi0.norm_sqr()));
    }
    let x = state.spec().x(bin);
    Ok(state.amplitudes()[bin] * Complex64::from_polar(1.0, -k0 * x) / ((2.0 * PI).sqrt() * phi0))
}

/// [`analytic_weak_value`] for every bin.
pub fn analytic_profile(state: &GridState, k0: f64) -> Result<Vec<Complex64>> {
    let phi0 = state.momentum_amplitude(k0);
    (0..state.len()).map(|b| analytic_with(state, phi0, b, k0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> GridState {
        let spec = GridSpec::centered(256, 10.0).unwrap();
        GridState::from_fn(spec, |x| Complex64::new((-x * x / 8.0).exp(), 0.0))
            .normalize()
            .unwrap()
    }

    #[test]
    fn analytic_at_zero_is_psi_over_phi0() {
        let s = gaussian();
        let phi0 = s.to_momentum().amplitudes()[128];
        for b in [40, 128, 200] {
            let w = analytic_weak_value(&s, b, 0.0).unwrap();
            let expect = s.amplitudes()[b] / (phi0 * (2.0 * PI).sqrt());
            assert!((w - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn analytic_profile_sums_to_one() {
        let s = gaussian().map(|x, z| z * Complex64::from_polar(1.0, 0.3 * x + 0.02 * x * x));
        for k0 in [0.0, 0.25, -0.4] {
            let dx = s.spec().dx();
            let total: Complex64 = analytic_profile(&s, k0).unwrap().iter().map(|z| z * dx).sum();
            assert!((total - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn scan_flags_null_bins_without_failing() {
        let spec = GridSpec::centered(16, 2.0).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        amps[7] = Complex64::new(1.0, 0.0);
        amps[9] = Complex64::new(-1.0, 0.0);
        let s = GridState::new(spec, amps).unwrap().normalize().unwrap();
        let p = scan_weak_values(&s, 0.2, &PostSelection::point(0.0), 1.0).unwrap();
        // only the coupled bins 7 and 9 leak amplitude through the slit
        assert_eq!(p.flagged_count(), 14);
        assert!(p.is_valid(7) && p.is_valid(9));
        assert!(analytic_weak_value(&s, 3, 0.0).is_err());
    }

    #[test]
    fn strategies_are_bit_identical() {
        let s = gaussian().map(|x, z| z * Complex64::from_polar(1.0, 0.1 * x));
        let ps = PostSelection::window(0.1, 2.0);
        let a = scan_weak_values_with(Strategy::Sequential, &s, 0.3, &ps, 1.0).unwrap();
        let b = scan_weak_values_with(Strategy::Parallel, &s, 0.3, &ps, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_settings() {
        let s = gaussian();
        assert!(scan_weak_values(&s, 0.0, &PostSelection::None, 1.0).is_err());
        assert!(scan_weak_values(&s, FRAC_PI_2, &PostSelection::None, 1.0).is_err());
        assert!(scan_weak_values(&s, 0.2, &PostSelection::None, 1.5).is_err());
    }
}
