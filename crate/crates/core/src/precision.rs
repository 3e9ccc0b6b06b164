//! Decimal working-precision bookkeeping on top of binary MPFR floats.
//!
//! All computations run at `digits` decimal digits (converted to a binary
//! mantissa with guard bits); callers request `target_digits` accurate
//! digits in reported values. Hankel constructions are exponentially
//! ill-conditioned in the matrix order, so the gap between the two is
//! enforced at construction and adaptive doubling is used upstream.

use rug::Float;

use crate::error::{CoreError, Result};

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Binary guard bits added on top of the decimal digit request.
const GUARD_BITS: u32 = 32;

/// Decimal working precision paired with a target output accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    digits: u32,
    target_digits: u32,
}

impl Precision {
    /// Requires `digits >= 30` and `digits > target_digits + 20`.
    pub fn new(digits: u32, target_digits: u32) -> Result<Self> {
        if digits < 30 {
            return Err(CoreError::InvalidParameter(format!(
                "working precision must be at least 30 digits, got {digits}"
            )));
        }
        if digits <= target_digits + 20 {
            return Err(CoreError::InvalidParameter(format!(
                "working digits ({digits}) must exceed target digits ({target_digits}) by more than 20"
            )));
        }
        Ok(Self {
            digits,
            target_digits,
        })
    }

    /// Precision schedule for an orthogonal-polynomial build up to degree
    /// `n_max`: `digits = max(64, 30 + 8 n_max)`, raised further if needed
    /// to stay clear of `target_digits`.
    pub fn for_n_max(n_max: usize, target_digits: u32) -> Self {
        let digits = (30 + 8 * n_max as u32).max(64).max(target_digits + 21);
        Self {
            digits,
            target_digits,
        }
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn target_digits(&self) -> u32 {
        self.target_digits
    }

    /// Binary mantissa bits used for all `Float` values at this precision.
    pub fn bits(&self) -> u32 {
        (self.digits as f64 * LOG2_10).ceil() as u32 + GUARD_BITS
    }

    /// Same target, doubled working digits.
    pub fn doubled(&self) -> Self {
        Self {
            digits: self.digits * 2,
            target_digits: self.target_digits,
        }
    }

    /// `10^{-digits}`.
    pub fn eps(&self) -> Float {
        self.pow10(-(self.digits as i32))
    }

    /// `10^{-target_digits}`.
    pub fn target_eps(&self) -> Float {
        self.pow10(-(self.target_digits as i32))
    }

    /// Relative stopping threshold for internal series and continued
    /// fractions: `10^{-(digits+5)}`.
    pub fn stop_eps(&self) -> Float {
        self.pow10(-(self.digits as i32 + 5))
    }

    /// `10^k` at working precision.
    pub fn pow10(&self, k: i32) -> Float {
        Float::with_val(self.bits(), 10).pow_i32(k)
    }

    /// Lift a value to working precision.
    pub fn float<T>(&self, v: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits(), v)
    }

    /// Decimal rendering at `target_digits` significant digits. Used for
    /// all serialized output so reports stay byte-stable.
    pub fn format(&self, x: &Float) -> String {
        format_digits(x, self.target_digits as usize)
    }
}

/// Decimal string with the given number of significant digits.
pub fn format_digits(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits.max(1)))
}

/// Parse a decimal string at the precision's working bits.
pub fn parse_decimal(s: &str, prec: &Precision) -> Result<Float> {
    let parsed = Float::parse(s)
        .map_err(|e| CoreError::InvalidParameter(format!("bad decimal literal {s:?}: {e}")))?;
    Ok(Float::with_val(prec.bits(), parsed))
}

trait PowI32 {
    fn pow_i32(self, k: i32) -> Float;
}

impl PowI32 for Float {
    fn pow_i32(self, k: i32) -> Float {
        use rug::ops::Pow;
        self.pow(k)
    }
}
