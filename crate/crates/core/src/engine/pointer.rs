use num_complex::Complex64;

use crate::error::{Error, Result};

const H: usize = 0;
const V: usize = 1;

/// Polarization pointer as a 2x2 density operator in the ordered basis
/// `(|H>, |V>)`. The unmeasured pointer is `|V>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerState {
    rho: [[Complex64; 2]; 2],
}

impl PointerState {
    pub fn vertical() -> Self {
        Self::pure(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)).unwrap()
    }

    pub fn horizontal() -> Self {
        Self::pure(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap()
    }

    /// Pure pointer `h|H> + v|V>`, normalized.
    pub fn pure(h: Complex64, v: Complex64) -> Result<Self> {
        Self::from_unnormalized([[h * h.conj(), h * v.conj()], [v * h.conj(), v * v.conj()]])
    }

    /// Divides a positive semidefinite matrix by its trace.
    pub fn from_unnormalized(rho: [[Complex64; 2]; 2]) -> Result<Self> {
        let tr = (rho[H][H] + rho[V][V]).re;
        if tr.is_nan() || tr < crate::state::ZERO_NORM {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / tr;
        Ok(PointerState {
            rho: [[rho[0][0] * s, rho[0][1] * s], [rho[1][0] * s, rho[1][1] * s]],
        })
    }

    /// Validating constructor: Hermitian, unit trace, nonnegative spectrum.
    pub fn from_density(rho: [[Complex64; 2]; 2]) -> Result<Self> {
        let p = PointerState { rho };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        let r = &self.rho;
        let herm = (r[0][1] - r[1][0].conj()).norm() <= 1e-12
            && r[0][0].im.abs() <= 1e-12
            && r[1][1].im.abs() <= 1e-12;
        if !herm {
            return Err(Error::param("rho", "not Hermitian"));
        }
        if (self.trace() - 1.0).abs() > 1e-12 {
            return Err(Error::param("rho", "trace differs from 1"));
        }
        let (lo, _) = self.eigenvalues();
        if lo < -1e-12 {
            return Err(Error::param("rho", format!("negative eigenvalue {lo:e}")));
        }
        Ok(())
    }

    pub fn density(&self) -> [[Complex64; 2]; 2] {
        self.rho
    }

    pub fn trace(&self) -> f64 {
        (self.rho[H][H] + self.rho[V][V]).re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let a = self.rho[H][H].re;
        let d = self.rho[V][V].re;
        let b = self.rho[H][V].norm_sqr();
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b).sqrt();
        (mean - rad, mean + rad)
    }

    /// `Tr(rho sigma_x)` with `sigma_x = [[0,1],[1,0]]`.
    pub fn sigma_x(&self) -> f64 {
        2.0 * self.rho[H][V].re
    }

    /// `Tr(rho sigma_y)` with `sigma_y = [[0,-i],[i,0]]`.
    pub fn sigma_y(&self) -> f64 {
        -2.0 * self.rho[H][V].im
    }

    /// `Tr(rho sigma_z)`; `+1` for `|H>`.
    pub fn sigma_z(&self) -> f64 {
        (self.rho[H][H] - self.rho[V][V]).re
    }

    /// `<H|rho|H>`.
    pub fn horizontal_population(&self) -> f64 {
        self.rho[H][H].re
    }
}
