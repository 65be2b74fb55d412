use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use super::dd::DoubleDouble;

/// Arithmetic precision of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// IEEE binary64, about 16 significant digits.
    Standard,
    /// Double-double, about 32 significant digits.
    Extended,
}

impl Precision {
    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Standard => "standard",
            Precision::Extended => "extended",
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" | "double" | "f64" => Ok(Precision::Standard),
            "extended" | "dd" | "double-double" | "quad" => Ok(Precision::Extended),
            other => Err(format!("unknown precision `{other}` (expected standard|extended)")),
        }
    }
}

/// Real scalar in one of the supported precisions.
///
/// Every numerical routine in the crate is generic over `Real`; the precision of
/// a computation is the precision of its inputs.
pub trait Real:
    Copy
    + Debug
    + Display
    + Default
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
{
    const PRECISION: Precision;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    /// Unit roundoff.
    fn epsilon() -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, y: Self) -> Self;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    fn floor(self) -> Self;
    fn is_finite(self) -> bool;
    fn mul_f64(self, b: f64) -> Self;
    /// Full-precision decimal rendering.
    fn to_full_string(self) -> String;
    fn parse_decimal(s: &str) -> Option<Self>;

    #[inline(always)]
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    #[inline(always)]
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    #[inline(always)]
    fn from_i64(n: i64) -> Self {
        Self::from_f64(n as f64)
    }
    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
    fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl Real for f64 {
    const PRECISION: Precision = Precision::Standard;

    #[inline(always)]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline(always)]
    fn to_f64(self) -> f64 {
        self
    }
    fn epsilon() -> f64 {
        f64::EPSILON / 2.0
    }
    #[inline(always)]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline(always)]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline(always)]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, y: Self) -> Self {
        f64::powf(self, y)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
    #[inline(always)]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline(always)]
    fn mul_f64(self, b: f64) -> Self {
        self * b
    }
    fn to_full_string(self) -> String {
        format!("{self:.16e}")
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl Real for DoubleDouble {
    const PRECISION: Precision = Precision::Extended;

    #[inline(always)]
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    #[inline(always)]
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    fn epsilon() -> f64 {
        DoubleDouble::EPSILON
    }
    #[inline(always)]
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        DoubleDouble::powi(self, n)
    }
    fn powf(self, y: Self) -> Self {
        DoubleDouble::powf(self, y)
    }
    fn ln(self) -> Self {
        DoubleDouble::ln(self)
    }
    fn exp(self) -> Self {
        DoubleDouble::exp(self)
    }
    fn floor(self) -> Self {
        DoubleDouble::floor(self)
    }
    #[inline(always)]
    fn is_finite(self) -> bool {
        DoubleDouble::is_finite(self)
    }
    #[inline(always)]
    fn mul_f64(self, b: f64) -> Self {
        DoubleDouble::mul_f64(self, b)
    }
    fn to_full_string(self) -> String {
        self.to_sci_string(32)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

/// `x^y` that stays on the integer-power path when `y` is integral, so that
/// integer exponents are exact to working precision in both modes.
pub fn pow_real<T: Real>(x: T, y: f64) -> T {
    if y.fract() == 0.0 && y.abs() < 1e6 {
        x.powi(y as i32)
    } else {
        x.powf(T::from_f64(y))
    }
}
