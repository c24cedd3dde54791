//! Scalar abstraction shared by every numeric module.
//!
//! All geometry, radar and imaging code is written against [`Real`], which is
//! implemented for `f32` and `f64`. Concrete aliases live at the crate root.

use nalgebra::{ComplexField, RealField};
use num_complex::Complex;
use num_traits::ToPrimitive;
use rustfft::FftNum;

/// Floating point scalar usable by the simulation pipeline.
///
/// The bound pulls in both nalgebra's `RealField` (transcendentals, vector
/// math) and rustfft's `FftNum`. Both define `abs`, so generic code uses
/// [`Real::magnitude`] instead.
pub trait Real: RealField + FftNum + ToPrimitive + Copy + Default {
    /// Converts an `f64` constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must be representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Absolute value.
    #[inline]
    fn magnitude(self) -> Self {
        <Self as ComplexField>::abs(self)
    }

    #[inline]
    fn as_usize(self) -> usize {
        self.to_usize().unwrap_or(0)
    }

    /// Machine epsilon.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// `exp(j * phase)`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    let (s, c) = phase.sin_cos();
    Complex::new(c, s)
}

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts dBm to watts.
#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Converts watts to dBm.
#[inline]
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// Converts a dB ratio to a linear power ratio.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip<T: Real>() {
        let x = T::lit(-2.5);
        assert_eq!(x.magnitude(), T::lit(2.5));
        assert_eq!(T::lit(0.25).as_f64(), 0.25);
        let z = cis(T::pi() / T::lit(2.0));
        assert!(z.re.magnitude() < T::lit(1e-6));
        assert!((z.im - T::one()).magnitude() < T::lit(1e-6));
    }

    #[test]
    fn scalar_helpers_work_for_both_widths() {
        roundtrip::<f32>();
        roundtrip::<f64>();
    }

    #[test]
    fn dbm_conversions() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-12);
        assert!((watts_to_dbm(1e-11) + 80.0).abs() < 1e-9);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
    }
}
