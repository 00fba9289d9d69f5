//! Conversion from physical ring geometry to walk parameters.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Vacuum speed of light in m/s (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {value}")))
    }
}

fn require_non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be non-negative, got {value}")))
    }
}

/// Round-trip phase of a ring of radius `radius`, `2π n_eff (2π r) / λ`.
///
/// The value is returned unreduced; use [`principal_phase`] when a value in
/// `[0, 2π)` is needed.
pub fn phase_from_geometry(radius: f64, n_eff: f64, wavelength: f64) -> Result<f64> {
    require_positive("radius", radius)?;
    require_positive("n_eff", n_eff)?;
    require_positive("wavelength", wavelength)?;
    Ok(2.0 * PI * n_eff * (2.0 * PI * radius) / wavelength)
}

/// Reduce a phase to `[0, 2π)`.
pub fn principal_phase(theta: f64) -> f64 {
    theta.rem_euclid(2.0 * PI)
}

/// Round-trip transmission `exp(-(α_t (L + L_c) + α_b L))`.
pub fn loss_from_geometry(
    absorption: f64,
    bending_loss: f64,
    ring_length: f64,
    coupler_length: f64,
) -> Result<f64> {
    require_non_negative("absorption", absorption)?;
    require_non_negative("bending_loss", bending_loss)?;
    require_positive("ring_length", ring_length)?;
    require_non_negative("coupler_length", coupler_length)?;
    Ok((-(absorption * (ring_length + coupler_length) + bending_loss * ring_length)).exp())
}

/// Duration of one walk step: the time light needs to cover half a ring.
pub fn half_ring_time(radius: f64, n_eff: f64) -> Result<f64> {
    require_positive("radius", radius)?;
    require_positive("n_eff", n_eff)?;
    Ok(PI * radius * n_eff / SPEED_OF_LIGHT)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_wavelength_per_circumference() {
        let r = 3.0e-6;
        let theta = phase_from_geometry(r, 1.0, 2.0 * PI * r).unwrap();
        assert!((theta - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn phase_direct_evaluation() {
        let theta = phase_from_geometry(20e-6, 1.5, 635e-9).unwrap();
        let expected = 2.0 * PI * 1.5 * (2.0 * PI * 20e-6) / 635e-9;
        assert_eq!(theta, expected);
        assert!(theta > 2.0 * PI);
        let reduced = principal_phase(theta);
        assert!((0.0..2.0 * PI).contains(&reduced));
    }

    #[test]
    fn doubling_wavelength_halves_phase() {
        let a = phase_from_geometry(20e-6, 1.5, 635e-9).unwrap();
        let b = phase_from_geometry(20e-6, 1.5, 2.0 * 635e-9).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-9 * a);
    }

    #[test]
    fn phase_rejects_non_positive() {
        assert!(phase_from_geometry(0.0, 1.5, 635e-9).is_err());
        assert!(phase_from_geometry(1e-6, -1.5, 635e-9).is_err());
        assert!(phase_from_geometry(1e-6, 1.5, 0.0).is_err());
    }

    #[test]
    fn lossless_geometry() {
        assert_eq!(loss_from_geometry(0.0, 0.0, 1e-4, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn unit_exponent() {
        let (l, lc) = (1e-4, 2e-5);
        let alpha = loss_from_geometry(1.0 / (l + lc), 0.0, l, lc).unwrap();
        assert!((alpha - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn loss_direct_evaluation() {
        // 0.01 / µm and 0.001 / µm, expressed per metre.
        let l = 125.66e-6;
        let alpha = loss_from_geometry(0.01e6, 0.001e6, l, 0.0).unwrap();
        let expected = (-(0.01f64 * 125.66 + 0.001 * 125.66)).exp();
        assert!((alpha - expected).abs() < 1e-12);
    }

    #[test]
    fn loss_rejects_negative() {
        assert!(loss_from_geometry(-1.0, 0.0, 1e-4, 0.0).is_err());
        assert!(loss_from_geometry(0.0, -1.0, 1e-4, 0.0).is_err());
        assert!(loss_from_geometry(0.0, 0.0, 1e-4, -1e-6).is_err());
    }

    #[test]
    fn half_ring_time_unit_construction() {
        let n_eff = 1.5;
        let r = SPEED_OF_LIGHT / (PI * n_eff);
        assert!((half_ring_time(r, n_eff).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn half_ring_time_direct_and_linear() {
        let dt = half_ring_time(20e-6, 1.5).unwrap();
        assert_eq!(dt, PI * 20e-6 * 1.5 / 2.99792458e8);
        let dt2 = half_ring_time(40e-6, 1.5).unwrap();
        assert!((dt2 - 2.0 * dt).abs() < 1e-27);
        assert!(half_ring_time(0.0, 1.5).is_err());
    }
}
