//! Sign-and-log representation for quantities that overflow `f64`.
//!
//! Determinants, partition functions, and tau-values are stored as a sign in
//! `{-1, 0, +1}` together with the natural log of the magnitude. Zero is
//! canonicalized to `(0, -inf)`.

use std::ops::{Div, DivAssign, Mul, MulAssign};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogValue {
    sign: i8,
    log_magnitude: f64,
}

impl SignedLogValue {
    pub const ZERO: Self = Self {
        sign: 0,
        log_magnitude: f64::NEG_INFINITY,
    };

    pub const ONE: Self = Self {
        sign: 1,
        log_magnitude: 0.0,
    };

    pub fn new(sign: i8, log_magnitude: f64) -> Self {
        assert!(
            (-1..=1).contains(&sign),
            "sign must be -1, 0 or +1, got {sign}"
        );
        if sign == 0 || log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                sign,
                log_magnitude,
            }
        }
    }

    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self {
                sign: if x > 0.0 { 1 } else { -1 },
                log_magnitude: x.abs().ln(),
            }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn log_magnitude(&self) -> f64 {
        self.log_magnitude
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Converts back to a plain `f64`, overflowing to `±inf` when the
    /// magnitude exceeds the double range.
    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.log_magnitude.exp()
    }

    pub fn recip(&self) -> Self {
        Self::new(self.sign, -self.log_magnitude)
    }

    pub fn powi(&self, k: u32) -> Self {
        if self.sign == 0 {
            if k == 0 {
                Self::ONE
            } else {
                Self::ZERO
            }
        } else {
            let sign = if self.sign < 0 && k % 2 == 1 { -1 } else { 1 };
            Self::new(sign, self.log_magnitude * f64::from(k))
        }
    }

    pub fn abs(&self) -> Self {
        Self::new(self.sign.abs(), self.log_magnitude)
    }
}

impl Mul for SignedLogValue {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            Self::ZERO
        } else {
            Self::new(self.sign * rhs.sign, self.log_magnitude + rhs.log_magnitude)
        }
    }
}

impl MulAssign for SignedLogValue {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Div for SignedLogValue {
    type Output = Self;

    fn div(self, rhs: Self) -> Self {
        assert!(rhs.sign != 0, "division of SignedLogValue by zero");
        self * rhs.recip()
    }
}

impl DivAssign for SignedLogValue {
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}
