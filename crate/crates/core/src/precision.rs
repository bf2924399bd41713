//! Working-precision abstraction.
//!
//! The series and continued-fraction code is written once against [`Real`]
//! and instantiated either with native `f64` (53 mantissa bits) or with an
//! MPFR float carrying an arbitrary mantissa width.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::Float;

/// Mantissa bits of an IEEE double.
pub const DOUBLE_BITS: u32 = 53;

/// Highest precision the escalation ladder reaches by default.
pub const MAX_BITS: u32 = 424;

/// Environment variable consulted by front ends for the default working
/// precision.
pub const PRECISION_ENV: &str = "RABI_PRECISION_BITS";

pub trait Real:
    Clone
    + Debug
    + Send
    + Sync
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64_bits(value: f64, bits: u32) -> Self;
    /// Rounds an MPFR value to `bits` of mantissa.
    fn from_mpfr(value: &Float, bits: u32) -> Self;
    fn to_f64(&self) -> f64;
    fn bits(&self) -> u32;
    fn abs(&self) -> Self;
    fn is_finite(&self) -> bool;
    fn is_zero(&self) -> bool;

    /// A constant carrying the same precision as `self`.
    fn lift(&self, value: f64) -> Self {
        Self::from_f64_bits(value, self.bits())
    }

    /// Unit roundoff at this precision.
    fn epsilon(&self) -> f64 {
        unit_roundoff(self.bits())
    }

    fn signum_f64(&self) -> f64 {
        let v = self.to_f64();
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

impl Real for f64 {
    fn from_f64_bits(value: f64, _bits: u32) -> Self {
        value
    }
    fn from_mpfr(value: &Float, _bits: u32) -> Self {
        value.to_f64()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn bits(&self) -> u32 {
        DOUBLE_BITS
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Real for Float {
    fn from_f64_bits(value: f64, bits: u32) -> Self {
        Float::with_val(bits, value)
    }
    fn from_mpfr(value: &Float, bits: u32) -> Self {
        Float::with_val(bits, value)
    }
    fn to_f64(&self) -> f64 {
        Float::to_f64(self)
    }
    fn bits(&self) -> u32 {
        self.prec()
    }
    fn abs(&self) -> Self {
        Float::with_val(self.prec(), Float::abs_ref(self))
    }
    fn is_finite(&self) -> bool {
        Float::is_finite(self)
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
}

/// `2^(1 - bits)`, the spacing of floats just above one.
pub fn unit_roundoff(bits: u32) -> f64 {
    2f64.powi(1 - bits as i32)
}

/// Next rung of the escalation ladder (doubling), or `None` past `cap`.
pub fn escalate(bits: u32, cap: u32) -> Option<u32> {
    let next = bits.saturating_mul(2);
    if bits >= cap {
        None
    } else {
        Some(next.min(cap))
    }
}

/// Reads the default precision from [`PRECISION_ENV`], falling back to
/// double precision.
pub fn default_bits_from_env() -> Result<u32, String> {
    match std::env::var(PRECISION_ENV) {
        Ok(s) => {
            let bits: u32 = s
                .trim()
                .parse()
                .map_err(|_| format!("{PRECISION_ENV}={s:?} is not an integer"))?;
            if !(DOUBLE_BITS..=4096).contains(&bits) {
                return Err(format!("{PRECISION_ENV}={bits} outside [{DOUBLE_BITS}, 4096]"));
            }
            Ok(bits)
        }
        Err(_) => Ok(DOUBLE_BITS),
    }
}

/// Runs `$body` with `$t` bound to `f64` when `$bits` is double precision
/// and to an MPFR float otherwise.
macro_rules! dispatch_precision {
    ($bits:expr, |$t:ident| $body:expr) => {{
        if $bits <= $crate::precision::DOUBLE_BITS {
            type $t = f64;
            $body
        } else {
            type $t = ::rug::Float;
            $body
        }
    }};
}
pub(crate) use dispatch_precision;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escalation_ladder_doubles_up_to_cap() {
        let mut b = DOUBLE_BITS;
        let mut seen = vec![b];
        while let Some(n) = escalate(b, MAX_BITS) {
            b = n;
            seen.push(b);
        }
        assert_eq!(seen, vec![53, 106, 212, 424]);
    }

    #[test]
    fn mpfr_keeps_precision_through_arithmetic() {
        let a = Float::from_f64_bits(1.0, 212);
        let third = a.lift(1.0) / a.lift(3.0);
        assert_eq!(third.bits(), 212);
        let back = third * a.lift(3.0) - a;
        assert!(back.abs().to_f64() < 1e-60);
    }

    #[test]
    fn roundoff_matches_f64_epsilon() {
        assert_eq!(unit_roundoff(53), f64::EPSILON);
    }
}
