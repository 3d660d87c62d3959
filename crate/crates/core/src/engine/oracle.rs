//! Brute-force reference for the scan. The joint system-pointer vector is
//! built explicitly in the orthonormal basis `|x_i>|p>`, the coupling is a
//! dense unitary, momentum post-selection is an explicit DFT-row projection,
//! and the pointer readout multiplies out the Pauli matrices. None of the
//! factorizations used by the engine appear here.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use super::postselect::PostSelection;
use super::coupling::CouplingConfig;
use crate::error::{Error, Result};
use crate::state::GridState;

pub const ORACLE_MAX_POINTS: usize = 256;

const H: usize = 0;
const V: usize = 1;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Weak-value density for one bin, computed without shortcuts.
pub fn oracle_full_simulation(state: &GridState, cfg: &CouplingConfig, ps: &PostSelection) -> Result<Complex64> {
    let n = state.len();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::GridTooLarge {
            n,
            cap: ORACLE_MAX_POINTS,
        });
    }
    cfg.validate(n)?;
    if cfg.phi <= 0.0 {
        return Err(Error::param("phi", "weak value is undefined at zero coupling"));
    }
    ps.validate()?;
    let spec = state.spec();
    let dx = spec.dx();
    let dk = spec.dk();
    let dim = 2 * n;

    // orthonormal coefficients: psi(x_i) sqrt(dx), pointer |V>
    let mut joint = DVector::<Complex64>::zeros(dim);
    for (i, z) in state.amplitudes().iter().enumerate() {
        joint[2 * i + V] = z * dx.sqrt();
    }

    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    let (s, co) = cfg.phi.sin_cos();
    let b = cfg.bin_index;
    // R(phi): |V> -> cos|V> + sin|H>, |H> -> cos|H> - sin|V>
    u[(2 * b + H, 2 * b + H)] = c(co, 0.0);
    u[(2 * b + V, 2 * b + H)] = c(-s, 0.0);
    u[(2 * b + H, 2 * b + V)] = c(s, 0.0);
    u[(2 * b + V, 2 * b + V)] = c(co, 0.0);
    let coupled = &u * &joint;

    // rows of <k|x_i> in the orthonormal bases: exp(-i k x_i) sqrt(dx dk / 2 pi)
    let ks: Vec<f64> = match *ps {
        PostSelection::Point { k0 } => vec![k0],
        PostSelection::Window { .. } => spec.wavenumbers().into_iter().filter(|&k| ps.accepts(k)).collect(),
        PostSelection::None => Vec::new(),
    };
    if matches!(ps, PostSelection::Window { .. }) && ks.is_empty() {
        return Err(Error::param("width", "window contains no grid wavenumber"));
    }
    let mut rho = Matrix2::<Complex64>::zeros();
    if matches!(ps, PostSelection::None) {
        for i in 0..n {
            let pointer = nalgebra::Vector2::new(coupled[2 * i + H], coupled[2 * i + V]);
            rho += pointer * pointer.adjoint();
        }
    } else {
        let amp = (dx * dk / (2.0 * PI)).sqrt();
        let mut proj = DMatrix::<Complex64>::zeros(2 * ks.len(), dim);
        for (r, &k) in ks.iter().enumerate() {
            for i in 0..n {
                let e = Complex64::from_polar(amp, -k * spec.x(i));
                proj[(2 * r + H, 2 * i + H)] = e;
                proj[(2 * r + V, 2 * i + V)] = e;
            }
        }
        let selected = &proj * &coupled;
        for r in 0..ks.len() {
            let pointer = nalgebra::Vector2::new(selected[2 * r + H], selected[2 * r + V]);
            rho += pointer * pointer.adjoint();
        }
    }
    let pass = rho.trace().re;
    if pass < crate::state::ZERO_NORM {
        return Err(Error::NullPostSelection(pass));
    }
    rho /= c(pass, 0.0);

    let sigma_x = Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
    let sigma_y = Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0));
    let ex = (rho * sigma_x).trace().re;
    let ey = (rho * sigma_y).trace().re;
    let readout = c(ex, -ey) * (cfg.visibility / s);
    // a rotation by phi moves the Bloch vector by 2 phi; divide by the bin width
    Ok(readout / (2.0 * dx))
}

/// Oracle value for every bin; `None` where nothing passes the slit.
pub fn oracle_scan(state: &GridState, phi: f64, ps: &PostSelection, visibility: f64) -> Result<Vec<Option<Complex64>>> {
    (0..state.len())
        .map(|b| {
            let cfg = CouplingConfig {
                phi,
                bin_index: b,
                visibility,
            };
            match oracle_full_simulation(state, &cfg, ps) {
                Ok(v) => Ok(Some(v)),
                Err(Error::NullPostSelection(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}
