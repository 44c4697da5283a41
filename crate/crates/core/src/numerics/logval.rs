//! Overflow-safe complex numbers stored as `exp(log_magnitude + i*phase)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A complex number in split log-polar form.
///
/// Zero is represented with `log_magnitude == -inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_magnitude: f64,
    pub phase: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_magnitude: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub fn new(log_magnitude: f64, phase: f64) -> Self {
        Self {
            log_magnitude,
            phase,
        }
    }

    /// `exp(log_scale) * value`, with the phase wrapped into (-pi, pi].
    pub fn from_scaled(value: Complex64, log_scale: f64) -> Self {
        let norm = value.norm();
        if norm == 0.0 {
            return Self::ZERO;
        }
        Self {
            log_magnitude: log_scale + norm.ln(),
            phase: value.arg(),
        }
    }

    pub fn from_complex(value: Complex64) -> Self {
        Self::from_scaled(value, 0.0)
    }

    /// Plain complex value; overflows to infinity or underflows to zero when
    /// the magnitude is outside the double range.
    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.log_magnitude.exp(), self.phase)
    }

    pub fn is_zero(self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    pub fn mul(self, other: LogComplex) -> LogComplex {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        LogComplex::new(
            self.log_magnitude + other.log_magnitude,
            wrap_phase(self.phase + other.phase),
        )
    }

    pub fn div(self, other: LogComplex) -> LogComplex {
        LogComplex::new(
            self.log_magnitude - other.log_magnitude,
            wrap_phase(self.phase - other.phase),
        )
    }

    pub fn conj(self) -> LogComplex {
        LogComplex::new(self.log_magnitude, wrap_phase(-self.phase))
    }

    /// Sum of two log-polar numbers without leaving the log domain.
    pub fn add(self, other: LogComplex) -> LogComplex {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.log_magnitude >= other.log_magnitude {
            (self, other)
        } else {
            (other, self)
        };
        let rel = Complex64::from_polar((small.log_magnitude - big.log_magnitude).exp(), small.phase - big.phase);
        let sum = Complex64::new(1.0, 0.0) + rel;
        LogComplex::from_scaled(sum, big.log_magnitude).rotate(big.phase)
    }

    fn rotate(self, angle: f64) -> LogComplex {
        if self.is_zero() {
            return self;
        }
        LogComplex::new(self.log_magnitude, wrap_phase(self.phase + angle))
    }

    /// Ratio `self / other` as a plain complex number; intended for values
    /// of comparable magnitude.
    pub fn ratio(self, other: LogComplex) -> Complex64 {
        self.div(other).to_complex()
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_phase(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_arithmetic() {
        let a = Complex64::new(3.0, -4.0);
        let b = Complex64::new(-0.5, 2.0);
        let la = LogComplex::from_complex(a);
        let lb = LogComplex::from_complex(b);
        assert!((la.to_complex() - a).norm() < 1e-14);
        assert!((la.mul(lb).to_complex() - a * b).norm() < 1e-13);
        assert!((la.div(lb).to_complex() - a / b).norm() < 1e-13);
        assert!((la.add(lb).to_complex() - (a + b)).norm() < 1e-13);
        assert!((la.conj().to_complex() - a.conj()).norm() < 1e-14);
    }

    #[test]
    fn huge_magnitudes_stay_finite() {
        let x = LogComplex::new(5000.0, 1.0);
        let y = LogComplex::new(4999.0, -2.0);
        let s = x.add(y);
        assert!(s.log_magnitude.is_finite());
        let expect = Complex64::from_polar(1.0, 1.0) + Complex64::from_polar((-1.0f64).exp(), -2.0);
        assert!((s.log_magnitude - 5000.0 - expect.norm().ln()).abs() < 1e-12);
        assert!((wrap_phase(s.phase - expect.arg())).abs() < 1e-12);
    }

    #[test]
    fn zero_is_absorbing() {
        let z = LogComplex::ZERO;
        assert!(z.mul(LogComplex::new(1.0, 0.2)).is_zero());
        assert_eq!(z.add(LogComplex::new(1.0, 0.2)), LogComplex::new(1.0, 0.2));
    }
}
