use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{inner, norm_sqr, ZERO_NORM};
use crate::error::{Error, Result};

const BASIS_TOL: f64 = 1e-10;

/// State vector of an `N`-level system, amplitudes in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteState {
    amplitudes: Vec<Complex64>,
}

impl DiscreteState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::param("amplitudes", "dimension must be positive"));
        }
        Ok(DiscreteState { amplitudes })
    }

    /// Computational basis state `|index>` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::BinOutOfRange { index, len: dim });
        }
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[index] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    /// Haar-random pure state drawn from `seed`.
    pub fn random(dim: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        Self::new(amps)?.normalize()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn normalize(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2.is_nan() || n2 < ZERO_NORM {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n2.sqrt();
        Ok(DiscreteState {
            amplitudes: self.amplitudes.iter().map(|z| z * s).collect(),
        })
    }

    pub fn inner(&self, other: &DiscreteState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::SpecMismatch);
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn fidelity(&self, other: &DiscreteState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }
}

/// Two orthonormal bases of the same space whose cross overlaps all have
/// modulus squared `1/N`. Vectors are stored as computational-basis columns.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisPair {
    basis_a: Vec<Vec<Complex64>>,
    basis_b: Vec<Vec<Complex64>>,
}

impl BasisPair {
    /// Validates orthonormality and mutual unbiasedness to 1e-10.
    pub fn new(basis_a: Vec<Vec<Complex64>>, basis_b: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = basis_a.len();
        if n < 2 || basis_b.len() != n {
            return Err(Error::param("basis", "need two bases of equal size >= 2"));
        }
        if basis_a.iter().chain(&basis_b).any(|v| v.len() != n) {
            return Err(Error::param("basis", "vector length differs from basis size"));
        }
        check_orthonormal(&basis_a, "basis_a")?;
        check_orthonormal(&basis_b, "basis_b")?;
        let target = 1.0 / n as f64;
        for a in &basis_a {
            for b in &basis_b {
                let o = inner(a, b).norm_sqr();
                if (o - target).abs() > BASIS_TOL {
                    return Err(Error::param(
                        "basis",
                        format!("bases are not mutually unbiased (|<a|b>|^2 = {o})"),
                    ));
                }
            }
        }
        Ok(BasisPair { basis_a, basis_b })
    }

    pub fn dim(&self) -> usize {
        self.basis_a.len()
    }

    pub fn basis_a(&self) -> &[Vec<Complex64>] {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &[Vec<Complex64>] {
        &self.basis_b
    }

    /// `<b_j|a_i>`.
    pub fn overlap(&self, b: usize, a: usize) -> Complex64 {
        inner(&self.basis_b[b], &self.basis_a[a])
    }

    /// `<a_i|psi>`.
    pub fn a_component(&self, a: usize, psi: &DiscreteState) -> Complex64 {
        inner(&self.basis_a[a], psi.amplitudes())
    }

    /// `<b_j|psi>`.
    pub fn b_component(&self, b: usize, psi: &DiscreteState) -> Complex64 {
        inner(&self.basis_b[b], psi.amplitudes())
    }
}

fn check_orthonormal(basis: &[Vec<Complex64>], name: &'static str) -> Result<()> {
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            if (inner(u, v) - expect).norm() > BASIS_TOL {
                return Err(Error::param(name, format!("not orthonormal at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Computational basis paired with the discrete Fourier basis
/// `b_j(a) = exp(2 pi i j a / N) / sqrt(N)`.
pub fn fourier_mub(dim: usize) -> Result<BasisPair> {
    if dim < 2 {
        return Err(Error::param("dim", format!("need N >= 2, got {dim}")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let basis_a = (0..dim)
        .map(|i| {
            let mut v = vec![zero; dim];
            v[i] = Complex64::new(1.0, 0.0);
            v
        })
        .collect();
    let norm = 1.0 / (dim as f64).sqrt();
    let basis_b = (0..dim)
        .map(|j| {
            (0..dim)
                .map(|a| {
                    // reduce j*a mod N first so large dims keep full phase precision
                    let t = ((j * a) % dim) as f64 / dim as f64;
                    Complex64::from_polar(norm, 2.0 * PI * t)
                })
                .collect()
        })
        .collect();
    BasisPair::new(basis_a, basis_b)
}
