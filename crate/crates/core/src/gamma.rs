//! Pochhammer symbols and gamma-function ratios.
//!
//! Everything here is double precision. Parameters that sit within
//! [`INTEGER_TOLERANCE`] of a nonpositive integer are treated as that integer,
//! so user input such as `-2.0000000000001` terminates a product exactly.

use crate::error::{KdfError, Result};

/// Distance to the nearest integer below which a base counts as an integer.
pub const INTEGER_TOLERANCE: f64 = 1e-12;

/// Largest order handled by the (rescaled) direct product before switching to
/// log-gamma differences.
pub const DIRECT_PRODUCT_MAX_ORDER: u64 = 4096;

const RESCALE_HIGH: f64 = 1e150;
const RESCALE_LOW: f64 = 1e-150;

/// If `value` is a nonpositive integer `-k` (within tolerance), returns `k`.
pub fn nonpositive_integer(value: f64) -> Option<u64> {
    if !value.is_finite() {
        return None;
    }
    let rounded = value.round();
    if rounded <= 0.0 && (value - rounded).abs() < INTEGER_TOLERANCE {
        Some((-rounded) as u64)
    } else {
        None
    }
}

/// Replaces a base that is numerically a nonpositive integer by that integer.
pub(crate) fn snap(value: f64) -> f64 {
    match nonpositive_integer(value) {
        Some(k) => -(k as f64),
        None => value,
    }
}

/// A Pochhammer argument pair `(base)_order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PochhammerArg {
    pub base: f64,
    pub order: u64,
}

impl PochhammerArg {
    pub fn new(base: f64, order: u64) -> Self {
        Self { base, order }
    }

    pub fn value(&self) -> f64 {
        pochhammer(self.base, self.order)
    }

    pub fn log_value(&self) -> LogValue {
        log_pochhammer(self.base, self.order)
    }

    /// True when the symbol vanishes: `base = -k` with `k < order`.
    pub fn is_zero(&self) -> bool {
        matches!(nonpositive_integer(self.base), Some(k) if k < self.order)
    }
}

/// A real number stored as `sign · exp(ln_abs)`.
///
/// `sign == 0` encodes an exact zero, with `ln_abs = -∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub ln_abs: f64,
    pub sign: i8,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        ln_abs: f64::NEG_INFINITY,
        sign: 0,
    };

    pub const ONE: LogValue = LogValue {
        ln_abs: 0.0,
        sign: 1,
    };

    pub fn from_f64(value: f64) -> Self {
        if value == 0.0 {
            Self::ZERO
        } else {
            LogValue {
                ln_abs: value.abs().ln(),
                sign: if value < 0.0 { -1 } else { 1 },
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.ln_abs.exp()
        }
    }

    pub fn times(self, other: LogValue) -> LogValue {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        LogValue {
            ln_abs: self.ln_abs + other.ln_abs,
            sign: self.sign * other.sign,
        }
    }

    pub fn over(self, other: LogValue) -> LogValue {
        debug_assert!(!other.is_zero(), "division by an exact zero");
        if self.is_zero() {
            return Self::ZERO;
        }
        LogValue {
            ln_abs: self.ln_abs - other.ln_abs,
            sign: self.sign * other.sign,
        }
    }
}

/// Product `∏_{j<order} (base + j)` kept as mantissa times `2^exponent`.
///
/// Rescaling only multiplies by powers of two, so the rounding sequence is the
/// same as a plain running product as long as nothing overflows.
fn scaled_product(base: f64, order: u64) -> (f64, i32) {
    let mut mantissa = 1.0_f64;
    let mut exponent = 0_i32;
    for j in 0..order {
        mantissa *= base + j as f64;
        if mantissa == 0.0 {
            return (0.0, 0);
        }
        let magnitude = mantissa.abs();
        if !(RESCALE_LOW..=RESCALE_HIGH).contains(&magnitude) {
            let (m, e) = libm::frexp(mantissa);
            mantissa = m;
            exponent += e;
        }
    }
    (mantissa, exponent)
}

/// Rising factorial `(base)_order = base (base+1) ··· (base+order-1)`.
///
/// Total: returns 1 for `order = 0` and exactly 0 when `base = -k` with `k < order`.
/// Overflows to ±∞ when the true value exceeds the double range.
pub fn pochhammer(base: f64, order: u64) -> f64 {
    if order == 0 {
        return 1.0;
    }
    if let Some(k) = nonpositive_integer(base) {
        if k < order {
            return 0.0;
        }
    }
    let base = snap(base);
    if order <= DIRECT_PRODUCT_MAX_ORDER {
        let (mantissa, exponent) = scaled_product(base, order);
        libm::ldexp(mantissa, exponent)
    } else {
        log_pochhammer(base, order).to_f64()
    }
}

/// `ln|Γ(x)|` together with the sign of `Γ(x)`.
///
/// At poles the magnitude is `+∞` and the sign is reported as +1.
pub fn ln_gamma(x: f64) -> (f64, i8) {
    let (value, sign) = libm::lgamma_r(x);
    (value, if sign < 0 { -1 } else { 1 })
}

/// Overflow-safe `(base)_order` as a [`LogValue`].
pub fn log_pochhammer(base: f64, order: u64) -> LogValue {
    if order == 0 {
        return LogValue::ONE;
    }
    if let Some(k) = nonpositive_integer(base) {
        if k < order {
            return LogValue::ZERO;
        }
    }
    let base = snap(base);
    if order <= DIRECT_PRODUCT_MAX_ORDER {
        let (mantissa, exponent) = scaled_product(base, order);
        return LogValue {
            ln_abs: mantissa.abs().ln() + f64::from(exponent) * std::f64::consts::LN_2,
            sign: if mantissa < 0.0 { -1 } else { 1 },
        };
    }
    // Γ(base + order) / Γ(base); neither argument is a pole here.
    let (ln_num, sign_num) = ln_gamma(base + order as f64);
    let (ln_den, sign_den) = ln_gamma(base);
    LogValue {
        ln_abs: ln_num - ln_den,
        sign: sign_num * sign_den,
    }
}

/// `Γ(num) / Γ(den)` through log-gamma differences.
pub fn gamma_ratio(num: f64, den: f64) -> Result<f64> {
    for (name, value) in [("num", num), ("den", den)] {
        if nonpositive_integer(value).is_some() {
            return Err(KdfError::Pole {
                parameter: name.to_string(),
                value,
            });
        }
    }
    let (ln_num, sign_num) = ln_gamma(num);
    let (ln_den, sign_den) = ln_gamma(den);
    Ok(f64::from(sign_num * sign_den) * (ln_num - ln_den).exp())
}

/// `ln n!`.
pub fn ln_factorial(n: u64) -> f64 {
    log_pochhammer(1.0, n).ln_abs
}
