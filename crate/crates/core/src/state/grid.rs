use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{inner, norm_sqr, ZERO_NORM};
use crate::error::{Error, Result};

/// Uniform transverse grid. Positions are `x_i = x_min + i*dx` (mm), and the
/// conjugate wavenumbers are `k_j = (j - n/2)*dk` (rad/mm), so `k = 0` sits
/// at index `n/2`. A symmetric range puts `x = 0` there too.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n_points: usize,
    x_min: f64,
    x_max: f64,
}

impl GridSpec {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 2, got {n_points}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "need x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        Ok(GridSpec {
            n_points,
            x_min,
            x_max,
        })
    }

    /// Symmetric grid `[-half_width, half_width)`.
    pub fn centered(n_points: usize, half_width: f64) -> Result<Self> {
        Self::new(n_points, -half_width, half_width)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / (self.n_points as f64 * self.dx())
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn k(&self, j: usize) -> f64 {
        (j as f64 - (self.n_points / 2) as f64) * self.dk()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.k(j)).collect()
    }

    /// Index of the grid point nearest to `x`, if `x` lies on the grid's span.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let t = ((x - self.x_min) / self.dx()).round();
        (t >= 0.0 && t < self.n_points as f64).then_some(t as usize)
    }

    /// Points per mm.
    pub fn density(&self) -> f64 {
        1.0 / self.dx()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    Position,
    Momentum,
}

/// Complex amplitudes sampled on a [`GridSpec`]. In the position
/// representation `sum |psi|^2 dx` is the norm; in the momentum
/// representation the measure is `dk`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    spec: GridSpec,
    amplitudes: Vec<Complex64>,
    repr: Representation,
}

impl GridState {
    pub fn new(spec: GridSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_representation(spec, amplitudes, Representation::Position)
    }

    pub fn with_representation(
        spec: GridSpec,
        amplitudes: Vec<Complex64>,
        repr: Representation,
    ) -> Result<Self> {
        if amplitudes.len() != spec.n_points {
            return Err(Error::InvalidGrid(format!(
                "expected {} amplitudes, got {}",
                spec.n_points,
                amplitudes.len()
            )));
        }
        Ok(GridState {
            spec,
            amplitudes,
            repr,
        })
    }

    /// Samples `f(x)` at every grid position.
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64) -> Complex64) -> Self {
        let amplitudes = (0..spec.n_points).map(|i| f(spec.x(i))).collect();
        GridState {
            spec,
            amplitudes,
            repr: Representation::Position,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Quadrature weight of one sample: `dx` or `dk`.
    pub fn measure(&self) -> f64 {
        match self.repr {
            Representation::Position => self.spec.dx(),
            Representation::Momentum => self.spec.dk(),
        }
    }

    /// Coordinate of sample `i` in the current representation.
    pub fn coordinate(&self, i: usize) -> f64 {
        match self.repr {
            Representation::Position => self.spec.x(i),
            Representation::Momentum => self.spec.k(i),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes) * self.measure()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2.is_nan() || n2 < ZERO_NORM {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n2.sqrt();
        Ok(GridState {
            spec: self.spec,
            amplitudes: self.amplitudes.iter().map(|z| z * s).collect(),
            repr: self.repr,
        })
    }

    /// `<self|other>` with the grid measure.
    pub fn inner(&self, other: &GridState) -> Result<Complex64> {
        if self.spec != other.spec || self.repr != other.repr {
            return Err(Error::SpecMismatch);
        }
        Ok(inner(&self.amplitudes, &other.amplitudes) * self.measure())
    }

    /// `|<a|b>|^2`, for normalized inputs.
    pub fn fidelity(&self, other: &GridState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.map(|_, z| z * factor)
    }

    /// Pointwise transform `f(coordinate, amplitude)`.
    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &z)| f(self.coordinate(i), z))
            .collect();
        GridState {
            spec: self.spec,
            amplitudes,
            repr: self.repr,
        }
    }

    /// `Phi(k) = (1/sqrt(2 pi)) sum_i psi(x_i) exp(-i k x_i) dx`, evaluated
    /// by direct summation at an arbitrary `k`. Position representation only.
    pub fn momentum_amplitude(&self, k: f64) -> Complex64 {
        debug_assert_eq!(self.repr, Representation::Position);
        let dx = self.spec.dx();
        let sum: Complex64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, z)| z * Complex64::from_polar(1.0, -k * self.spec.x(i)))
            .sum();
        sum * dx / (2.0 * PI).sqrt()
    }

    /// Momentum representation. Convention `<x|k> = exp(+i k x)/sqrt(2 pi)`,
    /// unitary with respect to the `dx`/`dk` measures. Identity on a state
    /// already in momentum representation.
    pub fn to_momentum(&self) -> Self {
        if self.repr == Representation::Momentum {
            return self.clone();
        }
        let spec = self.spec;
        let n = spec.n_points;
        let mut buf: Vec<Complex64> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &z)| if i % 2 == 0 { z } else { -z })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let pre = spec.dx() / (2.0 * PI).sqrt();
        for (j, z) in buf.iter_mut().enumerate() {
            *z *= Complex64::from_polar(pre, -spec.k(j) * spec.x_min);
        }
        GridState {
            spec,
            amplitudes: buf,
            repr: Representation::Momentum,
        }
    }

    /// Inverse of [`GridState::to_momentum`].
    pub fn to_position(&self) -> Self {
        if self.repr == Representation::Position {
            return self.clone();
        }
        let spec = self.spec;
        let n = spec.n_points;
        let mut buf: Vec<Complex64> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, &z)| z * Complex64::from_polar(1.0, spec.k(j) * spec.x_min))
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let pre = spec.dk() / (2.0 * PI).sqrt();
        for (i, z) in buf.iter_mut().enumerate() {
            *z *= if i % 2 == 0 { pre } else { -pre };
        }
        GridState {
            spec,
            amplitudes: buf,
            repr: Representation::Position,
        }
    }
}

pub fn momentum_transform(state: &GridState) -> GridState {
    state.to_momentum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn gaussian(spec: GridSpec, sigma: f64) -> GridState {
        GridState::from_fn(spec, |x| Complex64::new((-x * x / (2.0 * sigma * sigma)).exp(), 0.0))
            .normalize()
            .unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(1, -1.0, 1.0).is_err());
        assert!(GridSpec::new(96, -1.0, 1.0).is_err());
        assert!(GridSpec::new(64, 1.0, 1.0).is_err());
        assert!(GridSpec::new(64, -1.0, 1.0).is_ok());
    }

    #[test]
    fn centered_grid_has_exact_zeros() {
        let spec = GridSpec::centered(256, 10.0).unwrap();
        assert_eq!(spec.x(128), 0.0);
        assert_eq!(spec.k(128), 0.0);
        assert_eq!(spec.nearest_index(0.0), Some(128));
        assert_eq!(spec.nearest_index(11.0), None);
    }

    #[test]
    fn gaussian_maps_to_real_gaussian_of_inverse_width() {
        let spec = GridSpec::centered(512, 20.0).unwrap();
        let sigma = 1.5;
        let phi = gaussian(spec, sigma).to_momentum();
        let expected = GridState::with_representation(
            spec,
            spec.wavenumbers()
                .iter()
                .map(|&k| Complex64::new((-k * k * sigma * sigma / 2.0).exp(), 0.0))
                .collect(),
            Representation::Momentum,
        )
        .unwrap()
        .normalize()
        .unwrap();
        for (a, b) in phi.amplitudes().iter().zip(expected.amplitudes()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-10);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn modulation_shifts_momentum_peak() {
        let spec = GridSpec::centered(512, 40.0).unwrap();
        let m = 7.3 * spec.dk();
        let base = gaussian(spec, 4.0);
        let shifted = base.map(|x, z| z * Complex64::from_polar(1.0, m * x));
        let argmax = |s: &GridState| {
            s.amplitudes()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .unwrap()
                .0
        };
        let p0 = argmax(&base.to_momentum());
        let p1 = argmax(&shifted.to_momentum());
        assert_eq!(p1 - p0, 7);
    }

    #[test]
    fn momentum_amplitude_matches_fft_on_grid() {
        let spec = GridSpec::centered(128, 8.0).unwrap();
        let s = gaussian(spec, 1.0).map(|x, z| z * Complex64::from_polar(1.0, 0.3 * x * x));
        let phi = s.to_momentum();
        for j in [0, 17, 64, 100] {
            let d = s.momentum_amplitude(spec.k(j)) - phi.amplitudes()[j];
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn normalize_rejects_zero_state() {
        let spec = GridSpec::centered(8, 1.0).unwrap();
        let zero = GridState::new(spec, vec![Complex64::new(0.0, 0.0); 8]).unwrap();
        assert_eq!(zero.normalize(), Err(Error::ZeroNorm));
    }

    #[test]
    fn normalize_is_scale_invariant_and_idempotent() {
        let spec = GridSpec::centered(64, 3.0).unwrap();
        let s = gaussian(spec, 0.7);
        let doubled = s.scale(Complex64::new(2.0, 0.0)).normalize().unwrap();
        let again = s.normalize().unwrap();
        for ((a, b), c) in s.amplitudes().iter().zip(doubled.amplitudes()).zip(again.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
            assert!((a - c).norm() < 1e-12);
        }
    }

    #[test]
    fn fidelity_basics() {
        let spec = GridSpec::centered(64, 3.0).unwrap();
        let s = gaussian(spec, 0.7);
        assert_abs_diff_eq!(s.fidelity(&s).unwrap(), 1.0, epsilon = 1e-12);
        let rotated = s.scale(Complex64::from_polar(1.0, 1.234));
        assert_abs_diff_eq!(s.fidelity(&rotated).unwrap(), 1.0, epsilon = 1e-12);

        let dx = spec.dx();
        let mut a = vec![Complex64::new(0.0, 0.0); 64];
        let mut b = a.clone();
        a[10] = Complex64::new(1.0 / dx.sqrt(), 0.0);
        b[11] = Complex64::new(0.0, 1.0 / dx.sqrt());
        let a = GridState::new(spec, a).unwrap();
        let b = GridState::new(spec, b).unwrap();
        assert_abs_diff_eq!(a.fidelity(&b).unwrap(), 0.0, epsilon = 1e-12);

        let other = GridState::from_fn(GridSpec::centered(64, 4.0).unwrap(), |_| 1.0.into());
        assert_eq!(s.fidelity(&other), Err(Error::SpecMismatch));
    }

    fn arb_state() -> impl Strategy<Value = GridState> {
        (prop::sample::select(vec![8usize, 32, 128]), 0.5f64..20.0)
            .prop_flat_map(|(n, half)| {
                prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |v| {
                    let spec = GridSpec::centered(n, half).unwrap();
                    let amps = v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
                    GridState::new(spec, amps).unwrap()
                })
            })
            .prop_filter("nonzero", |s| s.norm_sqr() > 1e-6)
            .prop_map(|s| s.normalize().unwrap())
    }

    proptest! {
        #[test]
        fn parseval_holds(s in arb_state()) {
            let phi = s.to_momentum();
            prop_assert!((phi.norm_sqr() - s.norm_sqr()).abs() < 1e-12);
        }

        #[test]
        fn transform_round_trips(s in arb_state()) {
            let back = s.to_momentum().to_position();
            for (a, b) in s.amplitudes().iter().zip(back.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
