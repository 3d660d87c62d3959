//! Run configuration: TOML with one table per concern. Physical quantities
//! carry their unit in the key name.

use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use weakwave::engine::PostSelection;
use weakwave::scenario::{prepare, slit_offset_to_k, AttenuationProfile, OpticalParams, Scenario, ScenarioKind};
use weakwave::state::{read_state_csv, GridSpec, GridState};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub optics: OpticalParams,
    #[serde(default)]
    pub attenuation: AttenuationSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub measurement: MeasurementSection,
    #[serde(default)]
    pub counting: CountingSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    pub step_phase_rad: f64,
    pub step_over_bullseye: bool,
    /// Wavefunction CSV (`x_mm,re,im`) measured instead of a built-in
    /// preparation; the grid is taken from the file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_file: Option<PathBuf>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            kind: ScenarioKind::TruncatedGaussian,
            step_phase_rad: FRAC_PI_2,
            step_over_bullseye: false,
            state_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttenuationSection {
    pub min_transmission: f64,
    pub width_mm: f64,
    /// CSV `x_mm,transmission`; replaces the inverted Gaussian when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for AttenuationSection {
    fn default() -> Self {
        AttenuationSection {
            min_transmission: 0.1,
            width_mm: 10.0,
            file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n_points: usize,
    pub x_min_mm: f64,
    pub x_max_mm: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            n_points: 2048,
            x_min_mm: -32.0,
            x_max_mm: 32.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostselectKind {
    Point,
    Window,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasurementSection {
    pub phi_deg: f64,
    pub postselect: PostselectKind,
    /// Slit position in the Fourier plane; the window width is `optics.slit_width_um`.
    pub postselect_offset_um: f64,
    pub visibility: f64,
    /// Largest tolerated fraction of bins with a null post-selection.
    pub max_flagged_fraction: f64,
}

impl Default for MeasurementSection {
    fn default() -> Self {
        MeasurementSection {
            phi_deg: 20.0,
            postselect: PostselectKind::Point,
            postselect_offset_um: 0.0,
            visibility: 1.0,
            max_flagged_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountingSection {
    pub enabled: bool,
    pub n_incident: u64,
    pub seed: u64,
}

impl Default for CountingSection {
    fn default() -> Self {
        CountingSection {
            enabled: false,
            n_incident: weakwave::counting::DEFAULT_INCIDENT,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    /// Fraction of the peak modulus below which phases are not fitted.
    pub magnitude_floor: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            magnitude_floor: weakwave::analysis::DEFAULT_MAGNITUDE_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    PhiDeg,
    SlitOffsetUm,
    LensShiftUm,
    SlitWidthUm,
    NIncident,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] = [
        SweepParam::PhiDeg,
        SweepParam::SlitOffsetUm,
        SweepParam::LensShiftUm,
        SweepParam::SlitWidthUm,
        SweepParam::NIncident,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SweepParam::PhiDeg => "measurement.phi_deg",
            SweepParam::SlitOffsetUm => "optics.slit_offset_um",
            SweepParam::LensShiftUm => "optics.lens_shift_um",
            SweepParam::SlitWidthUm => "optics.slit_width_um",
            SweepParam::NIncident => "counting.n_incident",
        }
    }

    /// Accepts the dotted key or its last component.
    pub fn parse(name: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|p| p.key() == name || p.key().rsplit('.').next() == Some(name))
            .ok_or_else(|| {
                let known: Vec<&str> = Self::ALL.iter().map(|p| p.key()).collect();
                CliError::Validation(format!(
                    "sweep.parameter: unknown parameter `{name}`; expected one of {}",
                    known.join(", ")
                ))
            })
    }

    /// Copy of `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &RunConfig, value: f64) -> Result<RunConfig, CliError> {
        let mut c = cfg.clone();
        match self {
            SweepParam::PhiDeg => c.measurement.phi_deg = value,
            SweepParam::SlitOffsetUm => c.optics.slit_offset_um = value,
            SweepParam::LensShiftUm => c.optics.lens_shift_um = value,
            SweepParam::SlitWidthUm => c.optics.slit_width_um = value,
            SweepParam::NIncident => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u64::MAX as f64) {
                    return Err(CliError::Validation(format!(
                        "sweep.values: counting.n_incident must be a positive integer, got {value}"
                    )));
                }
                c.counting.enabled = true;
                c.counting.n_incident = value as u64;
            }
        }
        Ok(c)
    }
}

/// Configuration checked against every precondition, with derived
/// quantities computed once.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub scenario: Scenario,
    pub spec: GridSpec,
    pub phi_rad: f64,
    pub postselection: PostSelection,
    /// Normalized contents of `scenario.state_file`.
    pub state: Option<GridState>,
}

impl Resolved {
    /// The wavefunction under test: the loaded file or the prepared scenario.
    pub fn prepare(&self) -> Result<GridState, CliError> {
        if let Some(s) = &self.state {
            return Ok(s.clone());
        }
        prepare(&self.scenario, &self.spec).map_err(|e| match e {
            weakwave::Error::GridTooCoarse(m) => CliError::Validation(format!("grid: {m}")),
            other => other.into(),
        })
    }
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {reason}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(e.to_string().trim_end().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let mut cfg = self.clone();
        let state = match &self.scenario.state_file {
            Some(path) => {
                let f = File::open(path)
                    .map_err(|e| invalid("scenario.state_file", format!("{}: {e}", path.display())))?;
                let s = read_state_csv(BufReader::new(f))
                    .and_then(|s| s.normalize())
                    .map_err(|e| invalid("scenario.state_file", format!("{}: {e}", path.display())))?;
                let spec = s.spec();
                cfg.grid = GridSection {
                    n_points: spec.n_points(),
                    x_min_mm: spec.x_min(),
                    x_max_mm: spec.x_max(),
                };
                Some(s)
            }
            None => None,
        };
        cfg.resolve_with(state)
    }

    fn resolve_with(self, state: Option<GridState>) -> Result<Resolved, CliError> {
        let g = &self.grid;
        let spec = GridSpec::new(g.n_points, g.x_min_mm, g.x_max_mm).map_err(|e| invalid("grid", e))?;

        let m = &self.measurement;
        if !(m.phi_deg > 0.0 && m.phi_deg < 90.0) {
            return Err(invalid(
                "measurement.phi_deg",
                format!("coupling must satisfy 0 < phi < 90 degrees (weak value needs phi > 0), got {}", m.phi_deg),
            ));
        }
        if !(m.visibility > 0.0 && m.visibility <= 1.0) {
            return Err(invalid("measurement.visibility", format!("must lie in (0, 1], got {}", m.visibility)));
        }
        if !(0.0..=1.0).contains(&m.max_flagged_fraction) {
            return Err(invalid(
                "measurement.max_flagged_fraction",
                format!("must lie in [0, 1], got {}", m.max_flagged_fraction),
            ));
        }
        if !m.postselect_offset_um.is_finite() {
            return Err(invalid("measurement.postselect_offset_um", "must be finite"));
        }
        self.optics.validate().map_err(|e| match e {
            weakwave::Error::InvalidParameter { name, reason } => invalid(&format!("optics.{name}"), reason),
            other => invalid("optics", other),
        })?;
        if self.counting.n_incident == 0 {
            return Err(invalid("counting.n_incident", "must be positive"));
        }
        let floor = self.analysis.magnitude_floor;
        if !(0.0..1.0).contains(&floor) {
            return Err(invalid("analysis.magnitude_floor", format!("must lie in [0, 1), got {floor}")));
        }
        if !self.scenario.step_phase_rad.is_finite() {
            return Err(invalid("scenario.step_phase_rad", "must be finite"));
        }

        let a = &self.attenuation;
        let attenuation = match &a.file {
            Some(path) => {
                let f = File::open(path).map_err(|e| invalid("attenuation.file", format!("{}: {e}", path.display())))?;
                AttenuationProfile::read_csv(BufReader::new(f))
                    .map_err(|e| invalid("attenuation.file", format!("{}: {e}", path.display())))?
            }
            None => {
                let p = AttenuationProfile::InvertedGaussian {
                    min_transmission: a.min_transmission,
                    width_mm: a.width_mm,
                };
                p.validate().map_err(|e| invalid("attenuation", e))?;
                p
            }
        };

        let o = &self.optics;
        let k0 = slit_offset_to_k(m.postselect_offset_um, o.f2_mm, o.wavelength_nm);
        let postselection = match m.postselect {
            PostselectKind::Point => PostSelection::point(k0),
            PostselectKind::Window => PostSelection::window(k0, o.slit_k_width()),
            PostselectKind::None => PostSelection::None,
        };
        let scenario = Scenario {
            kind: self.scenario.kind,
            optics: *o,
            step_phase_rad: self.scenario.step_phase_rad,
            attenuation,
            step_over_bullseye: self.scenario.step_over_bullseye,
        };
        if let Some(sw) = &self.sweep {
            SweepParam::parse(&sw.parameter)?;
            if sw.values.iter().any(|v| !v.is_finite()) {
                return Err(invalid("sweep.values", "must be finite"));
            }
        }
        let phi_rad = m.phi_deg.to_radians();
        Ok(Resolved {
            config: self,
            scenario,
            spec,
            phi_rad,
            postselection,
            state,
        })
    }
}
