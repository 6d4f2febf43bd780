//! Exact rational scalars.
//!
//! [`Rational`] wraps an arbitrary-precision reduced fraction. Every
//! arithmetic operation is exact; the only places where a value is rounded
//! are the explicit grid operations ([`Rational::truncate`],
//! [`Rational::floor_to_places`], [`Rational::ceil_to_places`]) and the
//! reporting renderer [`Rational::format_decimal`], which rounds toward
//! +inf so printed upper bounds stay upper bounds.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::ParseError;

/// Largest decimal exponent accepted by [`Rational::parse_decimal`].
pub const MAX_DECIMAL_EXPONENT: i64 = 100_000;

/// Exact arbitrary-precision rational, always in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

pub(crate) fn pow10(places: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u8), places as usize)
}

impl Rational {
    /// `numer / denom`. Panics if `denom` is zero.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        let denom = denom.into();
        assert!(!denom.is_zero(), "rational with zero denominator");
        Rational(BigRational::new(numer.into(), denom))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `10^-places`.
    pub fn ulp(places: u32) -> Self {
        Rational(BigRational::new(BigInt::one(), pow10(places)))
    }

    /// Exact value of a finite `f32`. Returns `None` for NaN or infinities.
    pub fn from_f32(x: f32) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        Self::from_f64(x as f64)
    }

    /// Exact value of a finite `f64`. Returns `None` for NaN or infinities.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn square(&self) -> Self {
        Rational(&self.0 * &self.0)
    }

    /// Multiplicative inverse, or `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Lossy conversion for logging and timing reports only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `floor(self * 10^places) / 10^places`.
    pub fn floor_to_places(&self, places: u32) -> Self {
        let scale = pow10(places);
        let q = (self.numer() * &scale).div_floor(self.denom());
        Rational(BigRational::new(q, scale))
    }

    /// `ceil(self * 10^places) / 10^places`.
    pub fn ceil_to_places(&self, places: u32) -> Self {
        let scale = pow10(places);
        let q = (self.numer() * &scale).div_ceil(self.denom());
        Rational(BigRational::new(q, scale))
    }

    /// Truncate toward -inf onto the `10^-places` grid.
    ///
    /// Returns `(t, err)` with `t + err == self` and `0 <= err < 10^-places`.
    pub fn truncate(&self, places: u32) -> (Self, Self) {
        let t = self.floor_to_places(places);
        let err = self - &t;
        (t, err)
    }

    /// Parse a decimal literal such as `-1.5e-3` into its exact value.
    ///
    /// Grammar: `[+-]? digits? ('.' digits?)? ([eE] [+-]? digits)?` with at
    /// least one mantissa digit. No rounding takes place.
    pub fn parse_decimal(text: &str) -> Result<Self, ParseError> {
        let fail = |position: usize, reason: &'static str| ParseError {
            token: text.to_string(),
            position,
            reason,
        };
        let bytes = text.as_bytes();
        if bytes.is_empty() {
            return Err(fail(0, "empty literal"));
        }
        let mut pos = 0;
        let negative = match bytes[0] {
            b'-' => {
                pos = 1;
                true
            }
            b'+' => {
                pos = 1;
                false
            }
            _ => false,
        };

        let mut digits = String::new();
        let mut frac_len: i64 = 0;
        let mut seen_point = false;
        while pos < bytes.len() {
            match bytes[pos] {
                b'0'..=b'9' => {
                    digits.push(bytes[pos] as char);
                    if seen_point {
                        frac_len += 1;
                    }
                }
                b'.' if !seen_point => seen_point = true,
                b'e' | b'E' => break,
                _ => return Err(fail(pos, "unexpected character")),
            }
            pos += 1;
        }
        if digits.is_empty() {
            return Err(fail(pos.min(bytes.len().saturating_sub(1)), "missing digits"));
        }

        let mut exponent: i64 = 0;
        if pos < bytes.len() {
            // bytes[pos] is the exponent marker
            pos += 1;
            let exp_start = pos;
            let mut exp_negative = false;
            if pos < bytes.len() && (bytes[pos] == b'-' || bytes[pos] == b'+') {
                exp_negative = bytes[pos] == b'-';
                pos += 1;
            }
            if pos >= bytes.len() {
                return Err(fail(exp_start.min(bytes.len() - 1), "missing exponent digits"));
            }
            while pos < bytes.len() {
                let b = bytes[pos];
                if !b.is_ascii_digit() {
                    return Err(fail(pos, "unexpected character in exponent"));
                }
                exponent = exponent * 10 + i64::from(b - b'0');
                if exponent > MAX_DECIMAL_EXPONENT {
                    return Err(fail(pos, "exponent out of range"));
                }
                pos += 1;
            }
            if exp_negative {
                exponent = -exponent;
            }
        }

        let mantissa: BigInt = digits.parse().expect("ascii digits");
        let mantissa = if negative { -mantissa } else { mantissa };
        let shift = exponent - frac_len;
        let value = if shift >= 0 {
            BigRational::from_integer(mantissa * pow10(shift as u32))
        } else {
            BigRational::new(mantissa, pow10((-shift) as u32))
        };
        Ok(Rational(value))
    }

    /// Parse the exact serialization `num/den` (or a bare integer).
    pub fn parse_exact(text: &str) -> Result<Self, ParseError> {
        let fail = |position: usize, reason: &'static str| ParseError {
            token: text.to_string(),
            position,
            reason,
        };
        let parse_int = |s: &str, offset: usize, allow_sign: bool| -> Result<BigInt, ParseError> {
            let body = if allow_sign {
                s.strip_prefix('-').unwrap_or(s)
            } else {
                s
            };
            if body.is_empty() {
                return Err(fail(offset, "missing digits"));
            }
            if let Some(bad) = body.bytes().position(|b| !b.is_ascii_digit()) {
                return Err(fail(offset + (s.len() - body.len()) + bad, "unexpected character"));
            }
            Ok(s.parse().expect("validated integer"))
        };
        match text.split_once('/') {
            None => Ok(Rational::from_integer(parse_int(text, 0, true)?)),
            Some((n, d)) => {
                let numer = parse_int(n, 0, true)?;
                let denom = parse_int(d, n.len() + 1, false)?;
                if denom.is_zero() {
                    return Err(fail(n.len() + 1, "zero denominator"));
                }
                Ok(Rational::new(numer, denom))
            }
        }
    }

    /// `num/den` rendering, always with an explicit denominator.
    pub fn to_exact_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    /// Exact decimal rendering when the value terminates in base 10.
    pub fn to_decimal_exact(&self) -> Option<String> {
        let mut den = self.denom().clone();
        let two = BigInt::from(2u8);
        let five = BigInt::from(5u8);
        let (mut twos, mut fives) = (0u32, 0u32);
        while den.is_even() {
            den /= &two;
            twos += 1;
        }
        while (&den % &five).is_zero() {
            den /= &five;
            fives += 1;
        }
        if !den.is_one() {
            return None;
        }
        let places = twos.max(fives);
        Some(render_scaled(&(self.numer() * pow10(places) / self.denom()), places))
    }

    /// Decimal rendering with `digits` fractional digits, rounded toward
    /// +inf, so a printed upper bound never understates the exact value.
    pub fn format_decimal(&self, digits: u32) -> String {
        let scale = pow10(digits);
        let q = (self.numer() * &scale).div_ceil(self.denom());
        render_scaled(&q, digits)
    }
}

/// Render the integer `q` as `q / 10^places` in positional notation.
fn render_scaled(q: &BigInt, places: u32) -> String {
    let sign = if q.sign() == Sign::Minus { "-" } else { "" };
    let digits = q.abs().to_string();
    if places == 0 {
        return format!("{sign}{digits}");
    }
    let places = places as usize;
    let padded = if digits.len() <= places {
        format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    format!("{sign}{int_part}.{frac_part}")
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

/// Accepts either the exact `num/den` form or a decimal literal.
impl FromStr for Rational {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.contains('/') {
            Rational::parse_exact(s)
        } else {
            Rational::parse_decimal(s)
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::from_integer(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<Rational> for BigRational {
    fn from(r: Rational) -> Self {
        r.0
    }
}

impl FromPrimitive for Rational {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Rational::from_integer(n))
    }

    fn from_u64(n: u64) -> Option<Self> {
        Some(Rational::from_integer(n))
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.0.is_integer() && self.0.numer() == &BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.0.cmp(&BigRational::from_integer(BigInt::from(*other))))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Division by zero panics, as for the underlying big rationals.
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

impl<'a> Product<&'a Rational> for Rational {
    fn product<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}
