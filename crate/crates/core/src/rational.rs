//! Exact rational scalars, decimal parsing/rendering, and the numeric-mode trait
//! shared by the exact and floating-point game evaluators.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Relative tie tolerance used by the floating-point mode.
pub const FLOAT_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid decimal literal `{0}`")]
pub struct ParseDecimalError(pub String);

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn factorial(n: usize) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Parses `"9.5"`, `"-3"`, `"0.125"`, or `"7/11"` into an exact rational.
pub fn parse_decimal(text: &str) -> Result<Rational, ParseDecimalError> {
    let err = || ParseDecimalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{whole}{frac}");
    let magnitude: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| err())?
    };
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let value = Rational::new(magnitude, scale);
    Ok(if negative { -value } else { value })
}

/// `"num/den"`, always with an explicit denominator.
pub fn format_fraction(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Rounds `value` half away from zero to an integer.
fn round_half_away(value: &Rational) -> BigInt {
    let (q, r) = value.numer().abs().div_rem(value.denom());
    let twice = r * BigInt::from(2);
    let mag = if twice >= *value.denom() { q + BigInt::one() } else { q };
    if value.is_negative() {
        -mag
    } else {
        mag
    }
}

fn insert_point(digits: &BigUint, decimals: usize, negative: bool) -> String {
    let mut s = digits.to_string();
    if decimals > 0 {
        if s.len() <= decimals {
            s = format!("{}{}", "0".repeat(decimals - s.len() + 1), s);
        }
        s.insert(s.len() - decimals, '.');
    }
    if negative && !digits.is_zero() {
        s.insert(0, '-');
    }
    s
}

/// Fixed-point rendering with exactly `decimals` digits after the point.
pub fn format_fixed(value: &Rational, decimals: usize) -> String {
    let scale = Rational::from_integer(num_traits::pow(BigInt::from(10), decimals));
    let scaled = round_half_away(&(value * scale));
    let negative = scaled.is_negative();
    insert_point(scaled.magnitude(), decimals, negative)
}

/// Plain decimal rendering rounded to `sig` significant digits, trailing zeros trimmed.
pub fn format_significant(value: &Rational, sig: usize) -> String {
    assert!(sig > 0);
    if value.is_zero() {
        return "0".to_string();
    }
    let abs = value.abs();
    // exponent e with 10^e <= |v| < 10^(e+1)
    let mut e: i64 = abs.numer().to_string().len() as i64 - abs.denom().to_string().len() as i64;
    let pow10 = |k: i64| -> Rational {
        if k >= 0 {
            Rational::from_integer(num_traits::pow(BigInt::from(10), k as usize))
        } else {
            Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), (-k) as usize))
        }
    };
    while pow10(e) > abs {
        e -= 1;
    }
    while pow10(e + 1) <= abs {
        e += 1;
    }
    let mut shift = sig as i64 - 1 - e;
    let mut scaled = round_half_away(&(&abs * pow10(shift)));
    if scaled.to_string().len() > sig {
        // rounding carried into a new digit, e.g. 9.99.. -> 10.0
        shift -= 1;
        scaled = round_half_away(&(&abs * pow10(shift)));
    }
    let text = if shift > 0 {
        insert_point(scaled.magnitude(), shift as usize, false)
    } else {
        let zeros = "0".repeat((-shift) as usize);
        format!("{}{}", scaled.magnitude(), zeros)
    };
    let text = if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        text
    };
    if value.is_negative() {
        format!("-{text}")
    } else {
        text
    }
}

/// Same rendering as [`format_significant`] for a binary float.
pub fn format_f64(value: f64, sig: usize) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    match Rational::from_float(value) {
        Some(r) => format_significant(&r, sig),
        None => value.to_string(),
    }
}

pub fn to_f64(value: &Rational) -> f64 {
    ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
}

/// Numeric mode for game evaluation: exact rationals or binary floats with a
/// relative tie tolerance.
pub trait Scalar:
    Zero
    + Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + AddAssign
    + for<'a> AddAssign<&'a Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    /// `exact` and `approx` describe the same number; each mode keeps the one it uses.
    fn from_parts(exact: &Rational, approx: f64) -> Self;

    fn from_rational(exact: &Rational) -> Self {
        Self::from_parts(exact, to_f64(exact))
    }

    fn as_f64(&self) -> f64;

    /// True when `self` beats `other` by more than the mode's tie tolerance.
    fn exceeds(&self, other: &Self) -> bool;
}

impl Scalar for Rational {
    fn from_parts(exact: &Rational, _approx: f64) -> Self {
        exact.clone()
    }

    fn from_rational(exact: &Rational) -> Self {
        exact.clone()
    }

    fn as_f64(&self) -> f64 {
        to_f64(self)
    }

    fn exceeds(&self, other: &Self) -> bool {
        self > other
    }
}

impl Scalar for f64 {
    fn from_parts(_exact: &Rational, approx: f64) -> Self {
        approx
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn exceeds(&self, other: &Self) -> bool {
        let scale = 1.0f64.max(self.abs()).max(other.abs());
        self - other > FLOAT_TIE_TOLERANCE * scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_decimal("9.5").unwrap(), ratio(19, 2));
        assert_eq!(parse_decimal("11").unwrap(), int(11));
        assert_eq!(parse_decimal("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_decimal("-2.50").unwrap(), ratio(-5, 2));
        assert_eq!(parse_decimal(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_decimal("7/11").unwrap(), ratio(7, 11));
        for bad in ["", "abc", "1.2.3", "1/0", ".", "1e5", "--1"] {
            assert!(parse_decimal(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn renders_significant_digits() {
        assert_eq!(format_significant(&ratio(7, 11), 12), "0.636363636364");
        assert_eq!(format_significant(&int(1), 12), "1");
        assert_eq!(format_significant(&ratio(77, 2), 12), "38.5");
        assert_eq!(format_significant(&ratio(2, 3), 3), "0.667");
        assert_eq!(format_significant(&ratio(-1, 3), 2), "-0.33");
        assert_eq!(format_significant(&ratio(19999, 2000), 3), "10");
        assert_eq!(format_significant(&int(123456), 2), "120000");
        assert_eq!(format_significant(&ratio(1, 1000), 3), "0.001");
    }

    #[test]
    fn renders_fixed_point() {
        assert_eq!(format_fixed(&ratio(-67271, 10000), 3), "-6.727");
        assert_eq!(format_fixed(&ratio(67, 10000), 3), "0.007");
        assert_eq!(format_fixed(&ratio(1, 2000), 3), "0.001");
        assert_eq!(format_fixed(&ratio(-1, 3000), 3), "0.000");
        assert_eq!(format_fixed(&int(2), 0), "2");
    }

    #[test]
    fn float_ties_use_relative_tolerance() {
        assert!(!1.0f64.exceeds(&(1.0 - 1e-12)));
        assert!(1.0f64.exceeds(&0.999));
        assert!(!(1e6f64 + 1e-4).exceeds(&1e6));
        assert!(ratio(1, 3).exceeds(&ratio(1, 4)));
    }
}
