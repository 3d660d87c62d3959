//! Test wavefunctions of the optical setup: the collimated, aperture-clipped
//! fiber mode and its amplitude- and phase-modified variants.

use std::f64::consts::PI;
use std::io::BufRead;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{GridSpec, GridState};

/// Minimum sampling density accepted by [`prepare`], points per mm.
pub const MIN_POINTS_PER_MM: f64 = 8.0;

/// Physical parameters of the bench. Units are in the field names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticalParams {
    pub wavelength_nm: f64,
    pub f1_mm: f64,
    pub f2_mm: f64,
    pub aperture_width_mm: f64,
    /// 1/e^2 intensity diameter of the collimated Gaussian.
    pub gauss_diameter_mm: f64,
    pub slit_width_um: f64,
    /// Transverse slit displacement in the Fourier plane.
    pub slit_offset_um: f64,
    /// Axial displacement of the collimating lens.
    pub lens_shift_um: f64,
}

impl Default for OpticalParams {
    fn default() -> Self {
        OpticalParams {
            wavelength_nm: 783.0,
            f1_mm: 300.0,
            f2_mm: 1000.0,
            aperture_width_mm: 43.0,
            gauss_diameter_mm: 56.4,
            slit_width_um: 15.0,
            slit_offset_um: 0.0,
            lens_shift_um: 0.0,
        }
    }
}

impl OpticalParams {
    /// Parameters of the heralded single-photon source.
    pub fn spdc() -> Self {
        OpticalParams {
            wavelength_nm: 800.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength_nm", self.wavelength_nm),
            ("f1_mm", self.f1_mm),
            ("f2_mm", self.f2_mm),
            ("aperture_width_mm", self.aperture_width_mm),
            ("gauss_diameter_mm", self.gauss_diameter_mm),
            ("slit_width_um", self.slit_width_um),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [("slit_offset_um", self.slit_offset_um), ("lens_shift_um", self.lens_shift_um)] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn wavelength_mm(&self) -> f64 {
        self.wavelength_nm * 1e-6
    }

    /// Momentum selected by the displaced slit.
    pub fn slit_k0(&self) -> f64 {
        slit_offset_to_k(self.slit_offset_um, self.f2_mm, self.wavelength_nm)
    }

    /// Momentum half-range passed by the slit, as a full window width.
    pub fn slit_k_width(&self) -> f64 {
        slit_offset_to_k(self.slit_width_um, self.f2_mm, self.wavelength_nm)
    }

    /// Linear phase gradient `m` (rad/mm) from the slit displacement.
    pub fn phase_gradient(&self) -> f64 {
        self.slit_k0()
    }

    /// Quadratic phase coefficient `r = pi dz / (f1^2 lambda)` (rad/mm^2).
    pub fn phase_curvature(&self) -> f64 {
        PI * (self.lens_shift_um * 1e-3) / (self.f1_mm * self.f1_mm * self.wavelength_mm())
    }
}

/// Transverse wavenumber selected by a slit displaced `offset_um` in the
/// focal plane of a lens of focal length `f2_mm`: `2 pi dx / (f2 lambda)`.
pub fn slit_offset_to_k(offset_um: f64, f2_mm: f64, wavelength_nm: f64) -> f64 {
    2.0 * PI * (offset_um * 1e-3) / (f2_mm * wavelength_nm * 1e-6)
}

/// Intensity transmission of the apodizing attenuator as a function of
/// the transverse coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttenuationProfile {
    /// `1 - (1 - min) exp(-2 x^2 / (width/2)^2)`: a smooth dip to `min` at
    /// the center with 1/e^2 full width `width_mm`.
    InvertedGaussian { min_transmission: f64, width_mm: f64 },
    /// Linear interpolation of `(x_mm, transmission)` pairs, clamped at the
    /// ends. Tables with only nonnegative `x` are looked up at `|x|`.
    Table { points: Vec<(f64, f64)> },
}

impl Default for AttenuationProfile {
    fn default() -> Self {
        AttenuationProfile::InvertedGaussian {
            min_transmission: 0.1,
            width_mm: 10.0,
        }
    }
}

impl AttenuationProfile {
    pub fn table(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("attenuation", "empty table"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let p = AttenuationProfile::Table { points };
        p.validate()?;
        Ok(p)
    }

    /// Two-column CSV `x_mm,transmission` with a header row.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut points = Vec::new();
        let mut header = false;
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header {
                header = true;
                if line.replace(' ', "") != "x_mm,transmission" {
                    return Err(Error::Parse(format!("expected header `x_mm,transmission`, got `{line}`")));
                }
                continue;
            }
            let mut it = line.split(',').map(|f| f.trim().parse::<f64>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(t)), None) => points.push((x, t)),
                _ => return Err(Error::Parse(format!("line {}: expected two numbers", n + 1))),
            }
        }
        Self::table(points)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AttenuationProfile::InvertedGaussian {
                min_transmission,
                width_mm,
            } => {
                if !(0.0..=1.0).contains(min_transmission) {
                    return Err(Error::param("min_transmission", "must lie in [0, 1]"));
                }
                if width_mm.is_nan() || *width_mm <= 0.0 {
                    return Err(Error::param("width_mm", "must be positive"));
                }
            }
            AttenuationProfile::Table { points } => {
                if points.iter().any(|&(x, t)| !x.is_finite() || !(0.0..=1.0).contains(&t)) {
                    return Err(Error::param("attenuation", "transmissions must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    pub fn transmission(&self, x: f64) -> f64 {
        match self {
            AttenuationProfile::InvertedGaussian {
                min_transmission,
                width_mm,
            } => {
                let w = 0.5 * width_mm;
                1.0 - (1.0 - min_transmission) * (-2.0 * x * x / (w * w)).exp()
            }
            AttenuationProfile::Table { points } => {
                let x = if points[0].0 >= 0.0 { x.abs() } else { x };
                let i = points.partition_point(|p| p.0 <= x);
                if i == 0 {
                    return points[0].1;
                }
                if i == points.len() {
                    return points[i - 1].1;
                }
                let (x0, t0) = points[i - 1];
                let (x1, t1) = points[i];
                t0 + (t1 - t0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    TruncatedGaussian,
    Bullseye,
    GlassStep,
    PhaseGradient,
    PhaseCurvature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub optics: OpticalParams,
    /// Phase added for `x > 0` by the glass plate.
    pub step_phase_rad: f64,
    pub attenuation: AttenuationProfile,
    /// Keep the attenuator in the beam for the glass-plate measurement.
    pub step_over_bullseye: bool,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, optics: OpticalParams) -> Self {
        Scenario {
            kind,
            optics,
            step_phase_rad: std::f64::consts::FRAC_PI_2,
            attenuation: AttenuationProfile::default(),
            step_over_bullseye: false,
        }
    }

    pub fn truncated_gaussian(optics: OpticalParams) -> Self {
        Self::new(ScenarioKind::TruncatedGaussian, optics)
    }

    pub fn validate(&self) -> Result<()> {
        self.optics.validate()?;
        if !self.step_phase_rad.is_finite() {
            return Err(Error::param("step_phase_rad", "must be finite"));
        }
        self.attenuation.validate()
    }

    /// The same scenario with every phase modification removed.
    pub fn without_phase(&self) -> Self {
        let kind = match self.kind {
            ScenarioKind::GlassStep if self.step_over_bullseye => ScenarioKind::Bullseye,
            ScenarioKind::Bullseye => ScenarioKind::Bullseye,
            _ => ScenarioKind::TruncatedGaussian,
        };
        Scenario { kind, ..self.clone() }
    }
}

/// Builds the normalized wavefunction for a scenario on `spec`.
pub fn prepare(scenario: &Scenario, spec: &GridSpec) -> Result<GridState> {
    scenario.validate()?;
    let o = &scenario.optics;
    let half = 0.5 * o.aperture_width_mm;
    let tol = 1e-9 * spec.dx();
    if spec.x_min() > -half + tol || spec.x(spec.n_points() - 1) < half - tol {
        return Err(Error::GridTooCoarse(format!(
            "grid [{}, {}) does not span the {} mm aperture",
            spec.x_min(),
            spec.x_max(),
            o.aperture_width_mm
        )));
    }
    if spec.density() < MIN_POINTS_PER_MM - 1e-9 {
        return Err(Error::GridTooCoarse(format!(
            "{:.3} points/mm, need at least {MIN_POINTS_PER_MM}",
            spec.density()
        )));
    }
    let w = 0.5 * o.gauss_diameter_mm;
    let attenuate = matches!(scenario.kind, ScenarioKind::Bullseye)
        || (scenario.kind == ScenarioKind::GlassStep && scenario.step_over_bullseye);
    let m = o.phase_gradient();
    let r = o.phase_curvature();
    let state = GridState::from_fn(*spec, |x| {
        if x.abs() > half + tol {
            return Complex64::new(0.0, 0.0);
        }
        let mut amp = (-x * x / (w * w)).exp();
        if attenuate {
            amp *= scenario.attenuation.transmission(x).sqrt();
        }
        let phase = match scenario.kind {
            ScenarioKind::GlassStep if x > 0.0 => scenario.step_phase_rad,
            ScenarioKind::PhaseGradient => m * x,
            ScenarioKind::PhaseCurvature => r * x * x,
            _ => 0.0,
        };
        Complex64::from_polar(amp, phase)
    });
    state.normalize()
}

/// Strong-measurement position distribution `|psi(x_i)|^2 dx`.
pub fn probability_scan(state: &GridState) -> Vec<f64> {
    let dx = state.measure();
    state.amplitudes().iter().map(|z| z.norm_sqr() * dx).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::centered(2048, 32.0).unwrap()
    }

    #[test]
    fn conversions_match_hand_values() {
        let o = OpticalParams {
            slit_offset_um: 40.0,
            lens_shift_um: 800.0,
            ..OpticalParams::default()
        };
        // 2 pi 0.04 / (1000 * 7.83e-4) and pi 0.8 / (300^2 * 7.83e-4)
        assert!((o.phase_gradient() - 0.320_980_092_320_796_3).abs() < 1e-12);
        assert!((o.phase_curvature() - 0.035_664_454_702_310_69).abs() < 1e-12);
        assert!((slit_offset_to_k(10.0, 1000.0, 783.0) - 8.024_502_308_019_907e-2).abs() < 1e-14);
        assert_eq!(slit_offset_to_k(0.0, 1000.0, 783.0), 0.0);
    }

    #[test]
    fn truncated_gaussian_is_clipped_with_flat_phase() {
        let spec = grid();
        let s = prepare(&Scenario::truncated_gaussian(OpticalParams::default()), &spec).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let edge = spec.nearest_index(21.5).unwrap();
        let left = spec.nearest_index(-21.5).unwrap();
        assert!(s.amplitudes()[edge].norm() > 0.0 && s.amplitudes()[left].norm() > 0.0);
        assert_eq!(s.amplitudes()[edge + 1].norm(), 0.0);
        assert_eq!(s.amplitudes()[left - 1].norm(), 0.0);
        assert!(s.amplitudes().iter().all(|z| z.im == 0.0 && z.re >= 0.0));
    }

    #[test]
    fn rejects_coarse_or_narrow_grids() {
        let sc = Scenario::truncated_gaussian(OpticalParams::default());
        assert!(matches!(
            prepare(&sc, &GridSpec::centered(256, 32.0).unwrap()),
            Err(Error::GridTooCoarse(_))
        ));
        assert!(matches!(
            prepare(&sc, &GridSpec::centered(2048, 20.0).unwrap()),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn phase_only_scenarios_keep_probability() {
        let spec = grid();
        let o = OpticalParams {
            slit_offset_um: 30.0,
            lens_shift_um: 600.0,
            ..OpticalParams::default()
        };
        let base = probability_scan(&prepare(&Scenario::truncated_gaussian(o), &spec).unwrap());
        for kind in [ScenarioKind::GlassStep, ScenarioKind::PhaseGradient, ScenarioKind::PhaseCurvature] {
            let p = probability_scan(&prepare(&Scenario::new(kind, o), &spec).unwrap());
            for (a, b) in p.iter().zip(&base) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bullseye_dip_follows_transmission() {
        let spec = grid();
        let o = OpticalParams::default();
        let base = probability_scan(&prepare(&Scenario::truncated_gaussian(o), &spec).unwrap());
        let sc = Scenario::new(ScenarioKind::Bullseye, o);
        let dip = probability_scan(&prepare(&sc, &spec).unwrap());
        let c = spec.nearest_index(0.0).unwrap();
        let scale = dip[c] / (base[c] * sc.attenuation.transmission(0.0));
        for i in 0..spec.n_points() {
            let expect = base[i] * sc.attenuation.transmission(spec.x(i)) * scale;
            assert!((dip[i] - expect).abs() < 1e-12);
        }
        assert!(dip[c] < 0.2 * base[c]);
    }

    #[test]
    fn prepare_is_deterministic() {
        let spec = grid();
        let sc = Scenario::new(ScenarioKind::PhaseCurvature, OpticalParams { lens_shift_um: 400.0, ..Default::default() });
        assert_eq!(prepare(&sc, &spec).unwrap(), prepare(&sc, &spec).unwrap());
    }

    #[test]
    fn attenuation_table_interpolates() {
        let csv = "x_mm,transmission\n0,0.2\n10,1.0\n";
        let t = AttenuationProfile::read_csv(csv.as_bytes()).unwrap();
        assert!((t.transmission(5.0) - 0.6).abs() < 1e-15);
        assert!((t.transmission(-5.0) - 0.6).abs() < 1e-15);
        assert_eq!(t.transmission(30.0), 1.0);
        assert!(AttenuationProfile::read_csv("x_mm,transmission\n0,1.5\n".as_bytes()).is_err());
    }

    #[test]
    fn uniform_state_has_flat_probability() {
        let spec = GridSpec::centered(64, 4.0).unwrap();
        let s = GridState::from_fn(spec, |_| 1.0.into()).normalize().unwrap();
        let p = probability_scan(&s);
        assert!(p.iter().all(|v| (v - 1.0 / 64.0).abs() < 1e-15));
    }
}
