use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coupling::JointState;
use super::pointer::PointerState;
use crate::error::{Error, Result};
use crate::state::{GridState, Representation, ZERO_NORM};

/// Which transverse momenta survive the slit in the Fourier plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PostSelection {
    /// Single momentum `k0` (rad/mm), accepted over one grid cell `dk`.
    Point { k0: f64 },
    /// Every grid momentum with `|k - k0| <= width/2`, traced out.
    Window { k0: f64, width: f64 },
    /// No slit: all momenta are kept.
    None,
}

impl PostSelection {
    pub fn point(k0: f64) -> Self {
        PostSelection::Point { k0 }
    }

    pub fn window(k0: f64, width: f64) -> Self {
        PostSelection::Window { k0, width }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PostSelection::Point { k0 } if !k0.is_finite() => {
                Err(Error::param("k0", "must be finite"))
            }
            PostSelection::Window { k0, width } => {
                if !k0.is_finite() {
                    Err(Error::param("k0", "must be finite"))
                } else if !(width > 0.0 && width.is_finite()) {
                    Err(Error::param("width", format!("window width must be > 0, got {width}")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Whether grid momentum `k` passes a window slit.
    pub fn accepts(&self, k: f64) -> bool {
        match *self {
            PostSelection::Point { k0 } => k == k0,
            PostSelection::Window { k0, width } => (k - k0).abs() <= 0.5 * width,
            PostSelection::None => true,
        }
    }
}

#[derive(Debug, Clone)]
enum Prepared {
    Point { k0: f64, phi0: Complex64 },
    Window { ks: Vec<f64>, phis: Vec<Complex64> },
    Open { norm: f64 },
}

/// Post-selection specialised to one system state. The momentum amplitudes
/// of the uncoupled state are computed once; each coupled bin then only
/// adds a local correction, which keeps a full scan at `O(n * window)`.
#[derive(Debug, Clone)]
pub struct Postselector<'a> {
    state: &'a GridState,
    kind: Prepared,
}

impl<'a> Postselector<'a> {
    pub fn new(state: &'a GridState, ps: &PostSelection) -> Result<Self> {
        ps.validate()?;
        if state.representation() != Representation::Position {
            return Err(Error::param("state", "post-selection needs a position-space state"));
        }
        let kind = match *ps {
            PostSelection::Point { k0 } => Prepared::Point {
                k0,
                phi0: state.momentum_amplitude(k0),
            },
            PostSelection::Window { .. } => {
                let phi = state.to_momentum();
                let spec = state.spec();
                let (ks, phis): (Vec<f64>, Vec<Complex64>) = (0..spec.n_points())
                    .filter(|&j| ps.accepts(spec.k(j)))
                    .map(|j| (spec.k(j), phi.amplitudes()[j]))
                    .unzip();
                if ks.is_empty() {
                    return Err(Error::param("width", "window contains no grid wavenumber"));
                }
                Prepared::Window { ks, phis }
            }
            PostSelection::None => Prepared::Open {
                norm: state.norm_sqr(),
            },
        };
        Ok(Postselector { state, kind })
    }

    /// Unnormalized pointer density and its trace (the pass probability).
    fn weight(&self, joint: &JointState<'_>) -> [[Complex64; 2]; 2] {
        let spec = self.state.spec();
        let dx = spec.dx();
        let dk = spec.dk();
        let b = joint.bin();
        let (s, c) = joint.phi().sin_cos();
        let psi_b = self.state.amplitudes()[b];
        let x_b = spec.x(b);
        // <k|x_b> psi_b with the dx quadrature weight
        let local = |k: f64| psi_b * Complex64::from_polar(dx / (2.0 * PI).sqrt(), -k * x_b);
        let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
        let mut add = |h: Complex64, v: Complex64, w: f64| {
            rho[0][0] += h * h.conj() * w;
            rho[0][1] += h * v.conj() * w;
            rho[1][0] += v * h.conj() * w;
            rho[1][1] += v * v.conj() * w;
        };
        match &self.kind {
            Prepared::Point { k0, phi0 } => {
                let l = local(*k0);
                add(l * s, phi0 - l * (1.0 - c), dk);
            }
            Prepared::Window { ks, phis } => {
                for (&k, &phi) in ks.iter().zip(phis) {
                    let l = local(k);
                    add(l * s, phi - l * (1.0 - c), dk);
                }
            }
            Prepared::Open { norm } => {
                let p = psi_b.norm_sqr() * dx;
                rho[0][0] = (s * s * p).into();
                rho[0][1] = (s * c * p).into();
                rho[1][0] = rho[0][1];
                rho[1][1] = (norm - s * s * p).into();
            }
        }
        rho
    }

    /// Normalized pointer and the probability of passing the slit.
    pub fn apply(&self, joint: &JointState<'_>) -> Result<(PointerState, f64)> {
        if !std::ptr::eq(joint.state(), self.state) && joint.state() != self.state {
            return Err(Error::SpecMismatch);
        }
        let rho = self.weight(joint);
        let pass = (rho[0][0] + rho[1][1]).re;
        if pass.is_nan() || pass < ZERO_NORM {
            return Err(Error::NullPostSelection(pass));
        }
        Ok((PointerState::from_unnormalized(rho)?, pass))
    }
}

/// Projects the joint state onto the accepted momenta and traces out the
/// momentum, leaving the (generally mixed) pointer.
pub fn postselect_pointer(joint: &JointState<'_>, ps: &PostSelection) -> Result<(PointerState, f64)> {
    Postselector::new(joint.state(), ps)?.apply(joint)
}
