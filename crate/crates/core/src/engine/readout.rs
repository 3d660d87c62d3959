use num_complex::Complex64;

use super::coupling::check_visibility;
use super::pointer::PointerState;
use crate::error::{Error, Result};

/// Rotating a linear polarization by `phi` turns the pointer's Bloch vector
/// by `2 phi`, so the Pauli readout carries twice the weak value:
/// `<sigma_x> - i <sigma_y> -> 2 sin(phi) <pi_x>_W` as `phi -> 0`.
pub const ROTATION_GAIN: f64 = 2.0;

/// `eta * (<sigma_x> - i <sigma_y>) / sin(phi)` for the final pointer.
pub fn pointer_readout(pointer: &PointerState, phi: f64, visibility: f64) -> Result<Complex64> {
    readout_from_expectations(pointer.sigma_x(), pointer.sigma_y(), phi, visibility)
}

/// The same readout from measured (or exact) Pauli expectations.
pub fn readout_from_expectations(sx: f64, sy: f64, phi: f64, visibility: f64) -> Result<Complex64> {
    if !(phi > 0.0 && phi <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::param("phi", format!("readout needs 0 < phi <= pi/2, got {phi}")));
    }
    check_visibility(visibility)?;
    Ok(Complex64::new(sx, -sy) * (visibility / phi.sin()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unrotated_pointer_reads_zero() {
        let r = pointer_readout(&PointerState::vertical(), 0.3, 1.0).unwrap();
        assert_eq!(r, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rotated_vertical_reads_twice_cosine() {
        for phi in [0.05, 0.35, 1.2] {
            let (s, c) = f64::sin_cos(phi);
            let p = PointerState::pure(s.into(), c.into()).unwrap();
            let r = pointer_readout(&p, phi, 1.0).unwrap();
            assert!((r.re - 2.0 * c).abs() < 1e-14);
            assert!(r.im.abs() < 1e-15);
        }
    }

    #[test]
    fn visibility_is_linear() {
        let p = PointerState::pure(Complex64::new(0.2, 0.1), Complex64::new(0.9, 0.0)).unwrap();
        let full = pointer_readout(&p, 0.3, 1.0).unwrap();
        let half = pointer_readout(&p, 0.3, 0.5).unwrap();
        assert_eq!(half, full * 0.5);
    }

    #[test]
    fn rejects_zero_angle() {
        assert!(pointer_readout(&PointerState::vertical(), 0.0, 1.0).is_err());
        assert!(pointer_readout(&PointerState::vertical(), 0.1, 0.0).is_err());
    }
}
