//! Exact rational numbers.
//!
//! Periods, start times, powers and energies are all carried as
//! arbitrary-precision fractions so that Pareto dominance and hypervolume
//! equality never depend on floating point rounding.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A fraction `num/den` kept in lowest terms with `den > 0`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(num.into(), den.into())))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(num, den)))
    }

    pub fn integer(v: i64) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
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

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn floor(&self) -> Self {
        Rational(self.0.floor())
    }

    pub fn ceil(&self) -> Self {
        Rational(self.0.ceil())
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    /// Numerator and denominator as `i128`, if both fit.
    pub fn to_i128_parts(&self) -> Option<(i128, i128)> {
        Some((self.0.numer().to_i128()?, self.0.denom().to_i128()?))
    }

    /// The value as an `i64` when it is an integer in range.
    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Always `num/den`, even for integers. This is the lossless wire form.
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }

    /// Decimal rendering with `digits` significant digits, computed exactly
    /// and rounded half away from zero.
    pub fn to_decimal(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.is_zero() {
            return "0".to_string();
        }
        let negative = self.is_negative();
        let value = self.0.abs();
        // exponent e such that 10^e <= value < 10^(e+1)
        let ten = BigRational::from_integer(10.into());
        let mut exp: i64 = 0;
        let mut scaled = value.clone();
        while scaled >= ten {
            scaled /= &ten;
            exp += 1;
        }
        while scaled < BigRational::one() {
            scaled *= &ten;
            exp -= 1;
        }
        // integer mantissa with `digits` digits
        let shift = digits as i64 - 1 - exp;
        let factor = BigInt::from(10).pow(shift.unsigned_abs() as u32);
        let shifted = if shift >= 0 {
            &value * BigRational::from_integer(factor.clone())
        } else {
            &value / BigRational::from_integer(factor.clone())
        };
        let half = BigRational::new(1.into(), 2.into());
        let mut mantissa = (shifted + half).floor().to_integer();
        let mut shift = shift;
        if mantissa.to_string().len() > digits {
            mantissa /= 10;
            shift -= 1;
        }
        let mut text = mantissa.to_string();
        if shift > 0 {
            let shift = shift as usize;
            if text.len() <= shift {
                text = format!("{}{}", "0".repeat(shift - text.len() + 1), text);
            }
            let point = text.len() - shift;
            text.insert(point, '.');
            while text.ends_with('0') {
                text.pop();
            }
            if text.ends_with('.') {
                text.pop();
            }
        } else {
            text.push_str(&"0".repeat((-shift) as usize));
        }
        if negative {
            text.insert(0, '-');
        }
        text
    }

    /// The exact decimal expansion when it terminates, such as `3.6`.
    pub fn to_exact_decimal(&self) -> Option<String> {
        let mut den = self.0.denom().clone();
        let mut places = 0u32;
        let (two, five) = (BigInt::from(2), BigInt::from(5));
        let mut scale = BigInt::one();
        while !den.is_one() {
            if (&den % &two).is_zero() {
                den /= &two;
                scale *= &five;
            } else if (&den % &five).is_zero() {
                den /= &five;
                scale *= &two;
            } else {
                return None;
            }
            places += 1;
        }
        if places == 0 {
            return Some(self.0.numer().to_string());
        }
        // numer * scale / 10^places with `places` fractional digits
        let scaled = self.0.numer().abs() * scale;
        let mut text = format!("{:0>width$}", scaled.to_string(), width = places as usize + 1);
        text.insert(text.len() - places as usize, '.');
        while text.ends_with('0') {
            text.pop();
        }
        if self.is_negative() {
            text.insert(0, '-');
        }
        Some(text)
    }

    /// Exact decimal when it terminates, otherwise `num/den`.
    pub fn to_plain_string(&self) -> String {
        self.to_exact_decimal().unwrap_or_else(|| self.to_string())
    }

    /// Parses `a/b`, an integer, or a plain decimal such as `0.9` or `-1.25`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::Parse {
            context: "rational".into(),
            message: format!("cannot parse {text:?} as a rational"),
        };
        if let Some((num, den)) = text.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| bad())?;
            let den: BigInt = den.trim().parse().map_err(|_| bad())?;
            return Rational::from_bigints(num, den).map_err(|_| bad());
        }
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let num: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| bad())?
        };
        let den = BigInt::from(10).pow(frac_part.len() as u32);
        let value = Rational(BigRational::new(num, den));
        Ok(if negative { -value } else { value })
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::integer(v)
    }
}

impl From<u64> for Rational {
    fn from(v: u64) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }
}

impl From<BigRational> for Rational {
    fn from(v: BigRational) -> Self {
        Rational(v)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rational::parse(s)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_fraction_string())
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_fraction_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Rational::parse(&text).map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(&self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

// Division panics on a zero divisor like the integer types; use
// `checked_div` where the divisor is data-dependent.
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, v| acc + v)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, v| acc + v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn lowest_terms_and_sign() {
        let v = r(6, -4);
        assert_eq!(v.to_fraction_string(), "-3/2");
        assert_eq!(r(0, 5).to_fraction_string(), "0/1");
        assert!(Rational::new(1, 0).is_err());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(Rational::parse("0.9").unwrap(), r(9, 10));
        assert_eq!(Rational::parse("23").unwrap(), r(23, 1));
        assert_eq!(Rational::parse("7/2").unwrap(), r(7, 2));
        assert_eq!(Rational::parse("-1.25").unwrap(), r(-5, 4));
        assert_eq!(Rational::parse(".5").unwrap(), r(1, 2));
        assert!(Rational::parse("1,2").is_err());
        assert!(Rational::parse("1/0").is_err());
        assert!(Rational::parse("").is_err());
    }

    #[test]
    fn display_forms() {
        assert_eq!(r(23, 1).to_string(), "23");
        assert_eq!(r(7, 2).to_string(), "7/2");
        assert_eq!(r(211, 10).to_decimal(6), "21.1");
        assert_eq!(r(1, 3).to_decimal(6), "0.333333");
        assert_eq!(r(2, 3).to_decimal(6), "0.666667");
        assert_eq!(r(1234567, 1).to_decimal(6), "1234570");
        assert_eq!(r(-1, 8).to_decimal(6), "-0.125");
        assert_eq!(r(9999995, 10000000).to_decimal(6), "1");
        assert_eq!(Rational::zero().to_decimal(6), "0");
    }

    #[test]
    fn exact_decimals() {
        assert_eq!(r(18, 5).to_exact_decimal().as_deref(), Some("3.6"));
        assert_eq!(r(-1, 8).to_exact_decimal().as_deref(), Some("-0.125"));
        assert_eq!(r(1, 100).to_exact_decimal().as_deref(), Some("0.01"));
        assert_eq!(r(4, 1).to_exact_decimal().as_deref(), Some("4"));
        assert_eq!(r(1, 3).to_exact_decimal(), None);
        assert_eq!(r(1, 3).to_plain_string(), "1/3");
    }

    #[test]
    fn floor_ceil() {
        assert_eq!(r(7, 2).floor(), r(3, 1));
        assert_eq!(r(7, 2).ceil(), r(4, 1));
        assert_eq!(r(-7, 2).floor(), r(-4, 1));
    }

    proptest! {
        #[test]
        fn reciprocal_product_is_one(n in -10_000i64..10_000, d in 1i64..10_000) {
            prop_assume!(n != 0);
            let a = r(n, d);
            prop_assert_eq!(&a * &a.recip().unwrap(), Rational::one());
        }

        #[test]
        fn order_matches_cross_multiplication(
            a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000
        ) {
            let lhs = r(a, b);
            let rhs = r(c, d);
            prop_assert_eq!(lhs.cmp(&rhs), (a * d).cmp(&(c * b)));
        }

        #[test]
        fn fraction_string_round_trips(n in any::<i64>(), d in 1i64..i64::MAX) {
            let v = r(n, d);
            prop_assert_eq!(Rational::parse(&v.to_fraction_string()).unwrap(), v);
        }

        #[test]
        fn plain_string_round_trips(n in -100_000i64..100_000, k in 0u32..6, j in 0u32..6, odd in prop::sample::select(vec![1i64, 3, 7])) {
            let v = r(n, 2i64.pow(k) * 5i64.pow(j) * odd);
            prop_assert_eq!(Rational::parse(&v.to_plain_string()).unwrap(), v);
        }
    }
}
