//! Finite-photon readout: every photon either dies at the slit or passes a
//! half- or quarter-wave plate and a polarizing beamsplitter onto one of two
//! ideal detectors.
//!
//! Seeding: the counts of `(bin, setting)` are drawn from a ChaCha8 stream
//! seeded with `splitmix64(seed ^ splitmix64(2*bin + setting_index + 1))`,
//! so every cell is reproducible on its own and execution order is
//! irrelevant.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::engine::{couple, readout_from_expectations, CouplingConfig, PostSelection, Postselector, ScanSettings};
use crate::engine::{BinFlag, WeakValueProfile, ROTATION_GAIN};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Strategy};
use crate::state::{GridSpec, GridState};

/// Default photon budget per (bin, setting).
pub const DEFAULT_INCIDENT: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    /// Half-wave plate: the detector imbalance measures `sigma_x`.
    Hwp,
    /// Quarter-wave plate: the imbalance measures `sigma_y`.
    Qwp,
}

impl Setting {
    pub fn index(self) -> u64 {
        match self {
            Setting::Hwp => 0,
            Setting::Qwp => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Setting::Hwp => "hwp",
            Setting::Qwp => "qwp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub bin_index: usize,
    pub setting: Setting,
    pub n1: u64,
    pub n2: u64,
    pub n_incident: u64,
    pub seed: u64,
}

impl CountRecord {
    pub fn detected(&self) -> u64 {
        self.n1 + self.n2
    }

    /// `(n1 - n2) / (n1 + n2)`, or `None` for an empty bin.
    pub fn imbalance(&self) -> Option<f64> {
        let n = self.detected();
        (n > 0).then(|| (self.n1 as f64 - self.n2 as f64) / n as f64)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the random stream for one `(bin, setting)` cell.
pub fn cell_seed(seed: u64, bin: usize, setting: Setting) -> u64 {
    splitmix64(seed ^ splitmix64(2 * bin as u64 + setting.index() + 1))
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    let p = p.clamp(0.0, 1.0);
    if n == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p checked to lie in (0, 1)").sample(rng)
}

/// Exact pass probability and `<sigma>` for every bin; `None` where the
/// post-selection is null.
fn exact_cells(
    strategy: Strategy,
    state: &GridState,
    settings: &ScanSettings,
) -> Result<Vec<Option<(f64, f64, f64)>>> {
    settings.validate()?;
    let selector = Postselector::new(state, &settings.postselection)?;
    map_indexed(strategy, state.len(), |b| {
        let cfg = CouplingConfig {
            phi: settings.phi,
            bin_index: b,
            visibility: settings.visibility,
        };
        let joint = couple(state, &cfg)?;
        match selector.apply(&joint) {
            Ok((p, pass)) => Ok(Some((pass, p.sigma_x(), p.sigma_y()))),
            Err(Error::NullPostSelection(_)) => Ok(None),
            Err(e) => Err(e),
        }
    })
    .into_iter()
    .collect()
}

fn draw(bin: usize, cell: Option<(f64, f64, f64)>, setting: Setting, n_incident: u64, seed: u64) -> CountRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(seed, bin, setting));
    let (n1, n2) = match cell {
        Some((pass, sx, sy)) => {
            let sigma = match setting {
                Setting::Hwp => sx,
                Setting::Qwp => sy,
            };
            let passed = binomial(&mut rng, n_incident, pass);
            let n1 = binomial(&mut rng, passed, 0.5 * (1.0 + sigma));
            (n1, passed - n1)
        }
        None => (0, 0),
    };
    CountRecord {
        bin_index: bin,
        setting,
        n1,
        n2,
        n_incident,
        seed,
    }
}

/// Detector counts for one wave-plate setting across all bins.
pub fn simulate_counts(
    state: &GridState,
    phi: f64,
    ps: &PostSelection,
    setting: Setting,
    n_incident: u64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    if n_incident == 0 {
        return Err(Error::param("n_incident", "must be positive"));
    }
    let settings = ScanSettings {
        phi,
        postselection: *ps,
        visibility: 1.0,
    };
    let cells = exact_cells(Strategy::default(), state, &settings)?;
    Ok(cells
        .into_iter()
        .enumerate()
        .map(|(b, c)| draw(b, c, setting, n_incident, seed))
        .collect())
}

/// Counts for both settings, interleaved `[hwp_0, qwp_0, hwp_1, ...]`.
pub fn simulate_scan(
    strategy: Strategy,
    state: &GridState,
    phi: f64,
    ps: &PostSelection,
    n_incident: u64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    if n_incident == 0 {
        return Err(Error::param("n_incident", "must be positive"));
    }
    let settings = ScanSettings {
        phi,
        postselection: *ps,
        visibility: 1.0,
    };
    let cells = exact_cells(strategy, state, &settings)?;
    Ok(map_indexed(strategy, 2 * cells.len(), |i| {
        let setting = if i % 2 == 0 { Setting::Hwp } else { Setting::Qwp };
        draw(i / 2, cells[i / 2], setting, n_incident, seed)
    }))
}

/// Weak-value density from Pauli expectations, as the engine reads it out.
pub fn weak_value_from_expectations(sx: f64, sy: f64, phi: f64, visibility: f64, dx: f64) -> Result<Complex64> {
    Ok(readout_from_expectations(sx, sy, phi, visibility)? / (ROTATION_GAIN * dx))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedProfile {
    pub spec: GridSpec,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub se_re: Vec<f64>,
    pub se_im: Vec<f64>,
    pub counts: Vec<CountRecord>,
    pub settings: ScanSettings,
}

impl EstimatedProfile {
    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn value(&self, bin: usize) -> Complex64 {
        Complex64::new(self.re[bin], self.im[bin])
    }

    /// Mean of the real- and imaginary-part standard errors over all bins.
    pub fn mean_standard_error(&self) -> f64 {
        let n = self.len() as f64;
        (self.se_re.iter().sum::<f64>() + self.se_im.iter().sum::<f64>()) / (2.0 * n)
    }

    /// The estimate as a profile; `postselect_prob` is the detected fraction.
    pub fn to_profile(&self) -> WeakValueProfile {
        let mut prob = vec![0.0; self.len()];
        for r in self.counts.iter().filter(|r| r.setting == Setting::Hwp) {
            prob[r.bin_index] = r.detected() as f64 / r.n_incident as f64;
        }
        WeakValueProfile {
            spec: self.spec,
            values: (0..self.len()).map(|b| self.value(b)).collect(),
            postselect_prob: prob,
            flags: vec![BinFlag::Ok; self.len()],
            settings: self.settings,
        }
    }
}

/// Turns detector imbalances into weak values with binomial error bars.
pub fn estimate_profile(
    records: &[CountRecord],
    spec: &GridSpec,
    settings: &ScanSettings,
) -> Result<EstimatedProfile> {
    settings.validate()?;
    let n = spec.n_points();
    let mut cells: Vec<[Option<&CountRecord>; 2]> = vec![[None, None]; n];
    for r in records {
        if r.bin_index >= n {
            return Err(Error::BinOutOfRange {
                index: r.bin_index,
                len: n,
            });
        }
        cells[r.bin_index][r.setting.index() as usize] = Some(r);
    }
    let scale = settings.visibility / (settings.phi.sin() * ROTATION_GAIN * spec.dx());
    let mut out = EstimatedProfile {
        spec: *spec,
        re: Vec::with_capacity(n),
        im: Vec::with_capacity(n),
        se_re: Vec::with_capacity(n),
        se_im: Vec::with_capacity(n),
        counts: records.to_vec(),
        settings: *settings,
    };
    for (b, cell) in cells.iter().enumerate() {
        let (hwp, qwp) = match cell {
            [Some(h), Some(q)] => (h, q),
            _ => {
                return Err(Error::param(
                    "records",
                    format!("bin {b} lacks a half- or quarter-wave-plate record"),
                ))
            }
        };
        let (sx, se_x) = imbalance_with_error(hwp).ok_or(Error::EmptyBin(b))?;
        let (sy, se_y) = imbalance_with_error(qwp).ok_or(Error::EmptyBin(b))?;
        let w = weak_value_from_expectations(sx, sy, settings.phi, settings.visibility, spec.dx())?;
        out.re.push(w.re);
        out.im.push(w.im);
        out.se_re.push(se_x * scale);
        out.se_im.push(se_y * scale);
    }
    Ok(out)
}

/// Imbalance and its binomial standard error `sqrt((1 - s^2) / N)`, floored
/// at `1/N` so that a fully one-sided bin still reports a nonzero error.
fn imbalance_with_error(r: &CountRecord) -> Option<(f64, f64)> {
    let s = r.imbalance()?;
    let n = r.detected() as f64;
    Some((s, ((1.0 - s * s).max(1.0 / n) / n).sqrt()))
}

/// CSV with columns `bin,x_mm,setting,n_incident,n1,n2,seed`.
pub fn write_counts_csv<W: Write>(records: &[CountRecord], spec: &GridSpec, comments: &[String], mut out: W) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "bin,x_mm,setting,n_incident,n1,n2,seed")?;
    for r in records {
        writeln!(
            out,
            "{},{:.16e},{},{},{},{},{}",
            r.bin_index,
            spec.x(r.bin_index),
            r.setting.as_str(),
            r.n_incident,
            r.n1,
            r.n2,
            r.seed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{scan_weak_values, PointerState};

    fn state() -> GridState {
        let spec = GridSpec::centered(64, 4.0).unwrap();
        GridState::from_fn(spec, |x| Complex64::from_polar((-x * x / 2.0).exp(), 0.3 * x))
            .normalize()
            .unwrap()
    }

    #[test]
    fn balanced_pointer_gives_balanced_counts() {
        // |V> has <sigma_x> = 0: on average half the photons go each way
        let p = PointerState::vertical();
        assert_eq!(p.sigma_x(), 0.0);
        let mut diff = 0i64;
        let mut total = 0u64;
        for bin in 0..200 {
            let r = draw(bin, Some((1.0, p.sigma_x(), p.sigma_y())), Setting::Hwp, 10_000, 9);
            diff += r.n1 as i64 - r.n2 as i64;
            total += r.detected();
        }
        // 3 sigma of a fair coin over 2e6 photons
        assert!((diff as f64).abs() < 3.0 * (total as f64).sqrt());
    }

    #[test]
    fn counts_conserve_photons_and_are_reproducible() {
        let s = state();
        let ps = PostSelection::point(0.0);
        let a = simulate_scan(Strategy::Parallel, &s, 0.3, &ps, 5000, 42).unwrap();
        let b = simulate_scan(Strategy::Sequential, &s, 0.3, &ps, 5000, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.detected() <= r.n_incident));
        let c = simulate_scan(Strategy::Parallel, &s, 0.3, &ps, 5000, 43).unwrap();
        assert_ne!(a, c);
        let hwp = simulate_counts(&s, 0.3, &ps, Setting::Hwp, 5000, 42).unwrap();
        assert_eq!(hwp, a.iter().copied().filter(|r| r.setting == Setting::Hwp).collect::<Vec<_>>());
    }

    #[test]
    fn exact_expectations_reproduce_engine() {
        let s = state();
        let ps = PostSelection::window(0.1, 1.0);
        let settings = ScanSettings {
            phi: 0.25,
            postselection: ps,
            visibility: 0.7,
        };
        let scan = scan_weak_values(&s, 0.25, &ps, 0.7).unwrap();
        let cells = exact_cells(Strategy::Sequential, &s, &settings).unwrap();
        for (b, cell) in cells.iter().enumerate() {
            let (_, sx, sy) = cell.unwrap();
            let w = weak_value_from_expectations(sx, sy, 0.25, 0.7, s.spec().dx()).unwrap();
            assert!((w - scan.values[b]).norm() < 1e-12);
        }
    }

    #[test]
    fn large_budget_converges_to_expectation() {
        let s = state();
        let ps = PostSelection::point(0.0);
        let settings = ScanSettings {
            phi: 0.4,
            postselection: ps,
            visibility: 1.0,
        };
        let cells = exact_cells(Strategy::Sequential, &s, &settings).unwrap();
        let recs = simulate_counts(&s, 0.4, &ps, Setting::Hwp, 1_000_000, 7).unwrap();
        let z: Vec<f64> = recs
            .iter()
            .zip(&cells)
            .map(|(r, cell)| {
                let (_, sx, _) = cell.unwrap();
                let se = ((1.0 - sx * sx) / r.detected() as f64).sqrt();
                (r.imbalance().unwrap() - sx) / se
            })
            .collect();
        assert!(z[32].abs() < 3.0, "center bin off by {} SE", z[32]);
        // chi-square with 64 degrees of freedom: mean 1, sd sqrt(2/64)
        let chi2 = z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;
        assert!((chi2 - 1.0).abs() < 4.0 * (2.0 / 64.0f64).sqrt(), "chi2/dof = {chi2}");
    }

    #[test]
    fn empty_bin_is_an_error() {
        let spec = GridSpec::centered(4, 1.0).unwrap();
        let settings = ScanSettings {
            phi: 0.3,
            postselection: PostSelection::None,
            visibility: 1.0,
        };
        let recs: Vec<CountRecord> = (0..4)
            .flat_map(|b| {
                [Setting::Hwp, Setting::Qwp].map(|setting| CountRecord {
                    bin_index: b,
                    setting,
                    n1: if b == 2 { 0 } else { 3 },
                    n2: if b == 2 { 0 } else { 1 },
                    n_incident: 10,
                    seed: 0,
                })
            })
            .collect();
        assert_eq!(estimate_profile(&recs, &spec, &settings), Err(Error::EmptyBin(2)));
        assert!(estimate_profile(&recs[..7], &spec, &settings).is_err());
    }
}
