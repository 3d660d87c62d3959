use std::io::Write;

use serde::Serialize;

use super::phase::PhaseProfile;
use crate::engine::WeakValueProfile;
use crate::error::{Error, Result};
use crate::state::GridState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityReport {
    /// `sum_i |p_i - t_i|`.
    pub l1: f64,
    pub max_deviation: f64,
}

fn report(p: &[f64], truth: &[f64]) -> Result<ProbabilityReport> {
    if p.len() != truth.len() {
        return Err(Error::SpecMismatch);
    }
    let mut l1 = 0.0;
    let mut max_deviation: f64 = 0.0;
    for (a, b) in p.iter().zip(truth) {
        let d = (a - b).abs();
        l1 += d;
        max_deviation = max_deviation.max(d);
    }
    Ok(ProbabilityReport { l1, max_deviation })
}

/// `|psi_rec|^2 dx` of the normalized profile against a strong-measurement
/// scan.
pub fn compare_probability(profile: &WeakValueProfile, truth: &[f64]) -> Result<ProbabilityReport> {
    let rec = profile.reconstruct()?;
    let dx = rec.measure();
    let p: Vec<f64> = rec.amplitudes().iter().map(|z| z.norm_sqr() * dx).collect();
    report(&p, truth)
}

/// Without post-selection the weak value is the ordinary expectation
/// `|psi|^2`; compares `Re` of the profile, scaled to unit sum, with the scan.
pub fn compare_expectation_profile(profile: &WeakValueProfile, truth: &[f64]) -> Result<ProbabilityReport> {
    let re: Vec<f64> = profile
        .values
        .iter()
        .enumerate()
        .map(|(i, z)| if profile.is_valid(i) { z.re } else { 0.0 })
        .collect();
    let sum: f64 = re.iter().sum();
    if sum.abs() < crate::state::ZERO_NORM {
        return Err(Error::DegenerateProfile);
    }
    let p: Vec<f64> = re.iter().map(|v| v / sum).collect();
    report(&p, truth)
}

/// Fidelity between the normalized reconstruction and the true state.
pub fn reconstruction_fidelity(profile: &WeakValueProfile, truth: &GridState) -> Result<f64> {
    profile.reconstruct()?.fidelity(truth)
}

/// Plot-ready CSV `x_mm,re,im,abs2,phase,flag` of the normalized
/// reconstruction. `phase` is the unwrapped phase where available and the
/// principal value elsewhere.
pub fn write_reconstruction_csv<W: Write>(
    profile: &WeakValueProfile,
    phase: Option<&PhaseProfile>,
    comments: &[String],
    mut out: W,
) -> Result<()> {
    let rec = profile.reconstruct()?;
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "x_mm,re,im,abs2,phase,flag")?;
    let mut unwrapped = vec![None; profile.len()];
    if let Some(pp) = phase {
        for (b, p) in pp.bins.iter().zip(&pp.phase) {
            unwrapped[*b] = Some(*p);
        }
    }
    for (i, z) in rec.amplitudes().iter().enumerate() {
        let flag = if !profile.is_valid(i) {
            profile.flags[i].as_str()
        } else if phase.is_some() && unwrapped[i].is_none() {
            "below_floor"
        } else {
            "ok"
        };
        let ph = unwrapped[i].unwrap_or_else(|| z.im.atan2(z.re));
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            profile.spec.x(i),
            z.re,
            z.im,
            z.norm_sqr(),
            ph,
            flag
        )?;
    }
    Ok(())
}
