use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::engine::WeakValueProfile;
use crate::error::{Error, Result};

/// Fraction of the peak modulus below which a bin's phase is ignored.
pub const DEFAULT_MAGNITUDE_FLOOR: f64 = 1e-2;

/// Unwrapped phase over the bins that survived flagging and the floor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseProfile {
    pub bins: Vec<usize>,
    pub x: Vec<f64>,
    pub phase: Vec<f64>,
    /// Constant already subtracted from `phase`.
    pub reference_offset: f64,
}

impl PhaseProfile {
    pub fn len(&self) -> usize {
        self.phase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phase.is_empty()
    }

    /// Shifts the curve so that it passes through zero at the sample
    /// nearest to `x_ref`.
    pub fn referenced_to(&self, x_ref: f64) -> Self {
        let i = self
            .x
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x_ref).abs().total_cmp(&(b.1 - x_ref).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let off = self.phase.get(i).copied().unwrap_or(0.0);
        PhaseProfile {
            bins: self.bins.clone(),
            x: self.x.clone(),
            phase: self.phase.iter().map(|p| p - off).collect(),
            reference_offset: self.reference_offset + off,
        }
    }

    /// Mean phase for `x > x0` minus mean phase for `x < x0`.
    pub fn step_across(&self, x0: f64) -> Result<f64> {
        let side = |right: bool| {
            let v: Vec<f64> = self
                .x
                .iter()
                .zip(&self.phase)
                .filter(|(x, _)| if right { **x > x0 } else { **x < x0 })
                .map(|(_, p)| *p)
                .collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        match (side(false), side(true)) {
            (Some(l), Some(r)) => Ok(r - l),
            _ => Err(Error::TooFewBins { need: 2, found: self.len() }),
        }
    }
}

/// Phase of every valid bin above [`DEFAULT_MAGNITUDE_FLOOR`] of the peak.
pub fn extract_phase(profile: &WeakValueProfile) -> Result<PhaseProfile> {
    extract_phase_with_floor(profile, DEFAULT_MAGNITUDE_FLOOR)
}

pub fn extract_phase_with_floor(profile: &WeakValueProfile, floor: f64) -> Result<PhaseProfile> {
    let xs: Vec<f64> = (0..profile.len()).map(|i| profile.spec.x(i)).collect();
    let valid: Vec<bool> = (0..profile.len()).map(|i| profile.is_valid(i)).collect();
    phase_of(&xs, &profile.values, &valid, floor)
}

/// Phase of `a * conj(b)`: the phase change between two measurements of
/// the same grid, restricted to bins usable in both.
pub fn phase_difference(a: &WeakValueProfile, b: &WeakValueProfile, floor: f64) -> Result<PhaseProfile> {
    if a.spec != b.spec {
        return Err(Error::SpecMismatch);
    }
    let peak = |p: &WeakValueProfile| p.valid_values().map(|(_, z)| z.norm()).fold(0.0, f64::max);
    let (pa, pb) = (peak(a), peak(b));
    let xs: Vec<f64> = (0..a.len()).map(|i| a.spec.x(i)).collect();
    let valid: Vec<bool> = (0..a.len())
        .map(|i| {
            a.is_valid(i) && b.is_valid(i) && a.values[i].norm() >= floor * pa && b.values[i].norm() >= floor * pb
        })
        .collect();
    let ratio: Vec<Complex64> = a.values.iter().zip(&b.values).map(|(u, v)| u * v.conj()).collect();
    phase_of(&xs, &ratio, &valid, 0.0)
}

fn phase_of(xs: &[f64], values: &[Complex64], valid: &[bool], floor: f64) -> Result<PhaseProfile> {
    let peak = values
        .iter()
        .zip(valid)
        .filter(|(_, ok)| **ok)
        .map(|(z, _)| z.norm())
        .fold(0.0, f64::max);
    let mut bins = Vec::new();
    let mut x = Vec::new();
    let mut phase: Vec<f64> = Vec::new();
    for (i, (z, ok)) in values.iter().zip(valid).enumerate() {
        if !*ok || z.norm() < floor * peak || z.norm() == 0.0 {
            continue;
        }
        let raw = z.im.atan2(z.re);
        let unwrapped = match phase.last() {
            Some(&prev) => raw + 2.0 * PI * ((prev - raw) / (2.0 * PI)).round(),
            None => raw,
        };
        bins.push(i);
        x.push(xs[i]);
        phase.push(unwrapped);
    }
    if phase.len() < 2 {
        return Err(Error::TooFewBins {
            need: 2,
            found: phase.len(),
        });
    }
    Ok(PhaseProfile {
        bins,
        x,
        phase,
        reference_offset: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{BinFlag, PostSelection, ScanSettings};
    use crate::state::GridSpec;

    fn profile(f: impl Fn(f64) -> Complex64) -> WeakValueProfile {
        let spec = GridSpec::centered(256, 20.0).unwrap();
        WeakValueProfile {
            spec,
            values: spec.positions().into_iter().map(f).collect(),
            postselect_prob: vec![1.0; 256],
            flags: vec![BinFlag::Ok; 256],
            settings: ScanSettings {
                phi: 0.3,
                postselection: PostSelection::None,
                visibility: 1.0,
            },
        }
    }

    #[test]
    fn real_positive_profile_has_zero_phase() {
        let p = extract_phase(&profile(|x| (1.0 + (-x * x).exp()).into())).unwrap();
        assert!(p.phase.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn injected_gradient_is_unwrapped() {
        let p = extract_phase(&profile(|x| Complex64::from_polar(1.0, 0.321 * x))).unwrap();
        for w in p.phase.windows(2) {
            assert!((w[1] - w[0]).abs() < PI);
        }
        let slope = (p.phase[p.len() - 1] - p.phase[0]) / (p.x[p.len() - 1] - p.x[0]);
        assert!((slope - 0.321).abs() < 1e-12);
    }

    #[test]
    fn floor_and_flags_remove_bins() {
        let mut prof = profile(|x| if x.abs() < 5.0 { 1.0.into() } else { 1e-4.into() });
        prof.flags[128] = BinFlag::NullPostSelection;
        let p = extract_phase(&prof).unwrap();
        assert!(p.x.iter().all(|x| x.abs() < 5.0));
        assert!(!p.bins.contains(&128));
        let only_one = profile(|x| if x == 0.0 { 1.0.into() } else { 0.0.into() });
        assert!(matches!(extract_phase(&only_one), Err(Error::TooFewBins { .. })));
    }

    #[test]
    fn global_phase_shifts_every_sample() {
        let f = |x: f64| Complex64::from_polar(1.0, 0.05 * x * x);
        let a = extract_phase(&profile(f)).unwrap();
        let b = extract_phase(&profile(move |x| f(x) * Complex64::from_polar(1.0, 2.5))).unwrap();
        let d0 = b.phase[0] - a.phase[0];
        for (u, v) in a.phase.iter().zip(&b.phase) {
            let d = v - u;
            assert!((d - d0).abs() < 1e-9);
        }
        let turns = (d0 - 2.5) / (2.0 * PI);
        assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn step_and_reference() {
        let p = extract_phase(&profile(|x| Complex64::from_polar(1.0, if x > 0.0 { 1.2 } else { 0.0 }))).unwrap();
        assert!((p.step_across(0.0).unwrap() - 1.2).abs() < 1e-12);
        let r = p.referenced_to(-20.0);
        assert_eq!(r.phase[0], 0.0);
    }
}
