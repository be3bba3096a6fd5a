//! Exact rational numbers used for every numeral value.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A reduced fraction with a positive denominator.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(Ratio<i128>);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer in rational literal `{0}`")]
    BadInteger(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// Panics if `denominator` is zero.
    pub fn new(numerator: i128, denominator: i128) -> Self {
        Rational(Ratio::new(numerator, denominator))
    }

    pub fn from_integer(n: i128) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
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

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> i128 {
        Integer::div_floor(&self.numer(), &self.denom())
    }

    pub fn checked_add(&self, other: &Rational) -> Option<Rational> {
        self.0.checked_add(&other.0).map(Rational)
    }

    pub fn checked_mul(&self, other: &Rational) -> Option<Rational> {
        self.0.checked_mul(&other.0).map(Rational)
    }

    /// `None` when `other` is zero.
    pub fn checked_div(&self, other: &Rational) -> Option<Rational> {
        if other.is_zero() {
            None
        } else {
            self.0.checked_div(&other.0).map(Rational)
        }
    }

    pub fn mul_int(&self, n: i128) -> Rational {
        Rational(self.0 * n)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Integers print bare, everything else as `p/q`.
impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        let parse_int = |t: &str| {
            t.trim()
                .parse::<i128>()
                .map_err(|_| ParseRationalError::BadInteger(s.to_string()))
        };
        match s.split_once('/') {
            Some((p, q)) => {
                let (p, q) = (parse_int(p)?, parse_int(q)?);
                if q == 0 {
                    return Err(ParseRationalError::ZeroDenominator(s.to_string()));
                }
                Ok(Rational::new(p, q))
            }
            None => Ok(Rational::from_integer(parse_int(s)?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i128> for Rational {
    fn from(n: i128) -> Self {
        Rational::from_integer(n)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        Rational(self.0 / rhs.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| acc + *x)
    }
}

/// Least common multiple of the denominators, `None` on overflow.
pub fn common_denominator<'a, I>(values: I) -> Option<i128>
where
    I: IntoIterator<Item = &'a Rational>,
{
    let mut l: i128 = 1;
    for v in values {
        let d = v.denom();
        let g = l.gcd(&d);
        l = (l / g).checked_mul(d)?;
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_prints() {
        assert_eq!(Rational::new(446, 10).to_string(), "223/5");
        assert_eq!(Rational::new(-4, -2).to_string(), "2");
        assert_eq!(Rational::new(3, -6).to_string(), "-1/2");
    }

    #[test]
    fn parses_both_forms() {
        assert_eq!("223/2".parse::<Rational>().unwrap(), Rational::new(223, 2));
        assert_eq!("79".parse::<Rational>().unwrap(), Rational::from_integer(79));
        assert_eq!(
            "1/0".parse::<Rational>(),
            Err(ParseRationalError::ZeroDenominator("1/0".into()))
        );
        assert!("x/2".parse::<Rational>().is_err());
    }

    #[test]
    fn lcm_of_denominators() {
        let vals = [Rational::new(1, 8), Rational::new(1, 12), Rational::new(3, 1)];
        assert_eq!(common_denominator(&vals), Some(24));
    }

    #[test]
    fn floor_handles_negatives() {
        assert_eq!(Rational::new(7, 2).floor(), 3);
        assert_eq!(Rational::new(-7, 2).floor(), -4);
    }
}
