//! Exact fractions on the lattice `(1/12)Z`.
//!
//! Every jdeg, slicing, marking and weight lives in `(1/12)Z`, so a value is
//! stored as its count of twelfths. Formatting and parsing go through the
//! reduced `p/q` form.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::OnceLock;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Unrestricted exact rational, used where denominators other than
/// divisors of 12 occur (volumes, flips).
pub type Rational = Ratio<i64>;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Frac12(i64);

impl Frac12 {
    pub const ZERO: Frac12 = Frac12(0);
    pub const ONE: Frac12 = Frac12(12);

    /// Builds `numer/denom`, failing unless the reduced denominator divides 12.
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::ZeroDenominator);
        }
        let scaled = numer * 12;
        if scaled % denom != 0 {
            let g = numer.gcd(&denom) * denom.signum();
            return Err(Error::NotTwelfths {
                numer: numer / g,
                denom: denom / g,
            });
        }
        Ok(Frac12(scaled / denom))
    }

    pub const fn from_int(n: i64) -> Self {
        Frac12(n * 12)
    }

    pub const fn from_twelfths(t: i64) -> Self {
        Frac12(t)
    }

    pub const fn twelfths(self) -> i64 {
        self.0
    }

    pub fn numer(self) -> i64 {
        self.0 / self.0.gcd(&12)
    }

    pub fn denom(self) -> i64 {
        12 / self.0.gcd(&12)
    }

    pub fn is_integer(self) -> bool {
        self.0 % 12 == 0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Fractional part in `[0, 1)`.
    pub fn fract(self) -> Self {
        Frac12(self.0.rem_euclid(12))
    }

    pub fn abs(self) -> Self {
        Frac12(self.0.abs())
    }

    pub fn checked_mul(self, rhs: Frac12) -> Result<Self> {
        Frac12::new(self.0 * rhs.0, 144)
    }

    pub fn checked_div(self, rhs: Frac12) -> Result<Self> {
        if rhs.0 == 0 {
            return Err(Error::ZeroDenominator);
        }
        Frac12::new(self.0, rhs.0)
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(self.0, 12)
    }

    pub fn try_from_rational(r: Rational) -> Result<Self> {
        Frac12::new(*r.numer(), *r.denom())
    }

    fn render(self) -> String {
        if self.denom() == 1 {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

const SMALL_RANGE: i64 = 240;

// Small values are printed often enough to cache.
fn cached_str(x: Frac12) -> Option<&'static str> {
    static SMALL: OnceLock<Vec<String>> = OnceLock::new();
    if !(-SMALL_RANGE..=SMALL_RANGE).contains(&x.0) {
        return None;
    }
    let table = SMALL.get_or_init(|| (-SMALL_RANGE..=SMALL_RANGE).map(|t| Frac12(t).render()).collect());
    Some(&table[(x.0 + SMALL_RANGE) as usize])
}

impl fmt::Display for Frac12 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match cached_str(*self) {
            Some(s) => f.write_str(s),
            None => f.write_str(&self.render()),
        }
    }
}

impl fmt::Debug for Frac12 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::BadFraction(s.to_string());
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: i64 = p.parse().map_err(|_| bad())?;
    let q: i64 = q.parse().map_err(|_| bad())?;
    if q == 0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(Rational::new(p, q))
}

// `[-]digits[/digits]` with a nonzero denominator and short numbers.
fn parse_plain(s: &[u8]) -> Option<(i64, i64)> {
    fn digits(s: &[u8]) -> Option<i64> {
        if s.is_empty() || s.len() > 12 {
            return None;
        }
        s.iter().try_fold(0i64, |acc, &c| {
            c.is_ascii_digit().then(|| acc * 10 + (c - b'0') as i64)
        })
    }
    let (sign, s) = match s.split_first() {
        Some((b'-', rest)) => (-1, rest),
        _ => (1, s),
    };
    let (p, q) = match s.iter().position(|&c| c == b'/') {
        Some(k) => (digits(&s[..k])?, digits(&s[k + 1..])?),
        None => (digits(s)?, 1),
    };
    (q != 0).then_some((sign * p, q))
}

impl FromStr for Frac12 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match *s.as_bytes() {
            [d @ b'0'..=b'9'] => return Ok(Frac12::from_int((d - b'0') as i64)),
            [p @ b'0'..=b'9', b'/', q @ b'1'..=b'9'] => {
                return Frac12::new((p - b'0') as i64, (q - b'0') as i64)
            }
            _ => {}
        }
        match parse_plain(s.as_bytes()) {
            Some((p, q)) => Frac12::new(p, q),
            None => Frac12::try_from_rational(parse_rational(s)?),
        }
    }
}

impl Serialize for Frac12 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match cached_str(*self) {
            Some(s) => serializer.serialize_str(s),
            None => serializer.collect_str(self),
        }
    }
}

impl<'de> Deserialize<'de> for Frac12 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Frac12;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a fraction such as \"5/6\"")
            }
            fn visit_str<E: serde::de::Error>(self, s: &str) -> std::result::Result<Frac12, E> {
                s.parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_str(V)
    }
}

impl Add for Frac12 {
    type Output = Frac12;
    fn add(self, rhs: Frac12) -> Frac12 {
        Frac12(self.0 + rhs.0)
    }
}

impl AddAssign for Frac12 {
    fn add_assign(&mut self, rhs: Frac12) {
        self.0 += rhs.0;
    }
}

impl Sub for Frac12 {
    type Output = Frac12;
    fn sub(self, rhs: Frac12) -> Frac12 {
        Frac12(self.0 - rhs.0)
    }
}

impl SubAssign for Frac12 {
    fn sub_assign(&mut self, rhs: Frac12) {
        self.0 -= rhs.0;
    }
}

impl Neg for Frac12 {
    type Output = Frac12;
    fn neg(self) -> Frac12 {
        Frac12(-self.0)
    }
}

impl Mul<i64> for Frac12 {
    type Output = Frac12;
    fn mul(self, rhs: i64) -> Frac12 {
        Frac12(self.0 * rhs)
    }
}

impl Sum for Frac12 {
    fn sum<I: Iterator<Item = Frac12>>(iter: I) -> Frac12 {
        Frac12(iter.map(|f| f.0).sum())
    }
}

impl<'a> Sum<&'a Frac12> for Frac12 {
    fn sum<I: Iterator<Item = &'a Frac12>>(iter: I) -> Frac12 {
        Frac12(iter.map(|f| f.0).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(s: &str) -> Frac12 {
        s.parse().unwrap()
    }

    #[test]
    fn reduces_on_construction() {
        assert_eq!(Frac12::new(2, 4).unwrap(), f("1/2"));
        assert_eq!(Frac12::new(-6, 9).unwrap(), f("-2/3"));
        assert_eq!(Frac12::new(3, -4).unwrap().to_string(), "-3/4");
        assert_eq!(f("10/12").to_string(), "5/6");
        assert_eq!(f("24/12").to_string(), "2");
        assert_eq!(Frac12::ZERO.to_string(), "0");
    }

    #[test]
    fn rejects_foreign_denominators() {
        assert!(matches!(
            Frac12::new(1, 5),
            Err(Error::NotTwelfths { numer: 1, denom: 5 })
        ));
        assert!(matches!(
            Frac12::new(2, 10),
            Err(Error::NotTwelfths { numer: 1, denom: 5 })
        ));
        assert!(matches!(Frac12::new(1, 0), Err(Error::ZeroDenominator)));
        assert!("1/24".parse::<Frac12>().is_err());
        assert!("x".parse::<Frac12>().is_err());
    }

    #[test]
    fn parse_edge_cases() {
        assert_eq!(f(" 1 / 2 "), f("1/2"));
        assert_eq!(f("-5/6").twelfths(), -10);
        assert_eq!(f("+3/4").twelfths(), 9);
        assert_eq!(f("6/-12").twelfths(), -6);
        assert!(matches!("1/0".parse::<Frac12>(), Err(Error::ZeroDenominator)));
        assert!("1/".parse::<Frac12>().is_err());
        assert!("-".parse::<Frac12>().is_err());
        assert!("1/2/3".parse::<Frac12>().is_err());
        assert_eq!(f("12000000000000/12000000000000"), Frac12::ONE);
    }

    #[test]
    fn checked_products() {
        assert_eq!(f("1/2").checked_mul(f("1/6")).unwrap(), f("1/12"));
        assert!(f("1/4").checked_mul(f("1/3")).is_ok());
        assert!(f("1/4").checked_mul(f("1/4")).is_err());
        assert_eq!(f("1/2").checked_div(f("1/6")).unwrap(), f("3"));
        assert!(f("1").checked_div(f("5/12")).is_err());
    }

    #[test]
    fn fract_and_integer() {
        assert_eq!(f("-1/4").fract(), f("3/4"));
        assert_eq!(f("7/6").fract(), f("1/6"));
        assert!(f("2").is_integer());
        assert!(!f("3/2").is_integer());
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(t in -400i64..400) {
            let x = Frac12::from_twelfths(t);
            prop_assert_eq!(x.to_string().parse::<Frac12>().unwrap(), x);
            prop_assert_eq!(x.numer() * 12 / x.denom(), t);
            prop_assert!([1, 2, 3, 4, 6, 12].contains(&x.denom()));
        }

        #[test]
        fn order_matches_cross_multiplication(a in -200i64..200, b in -200i64..200) {
            let (x, y) = (Frac12::from_twelfths(a), Frac12::from_twelfths(b));
            let lhs = x.numer() * y.denom();
            let rhs = y.numer() * x.denom();
            prop_assert_eq!(x.cmp(&y), lhs.cmp(&rhs));
        }
    }
}
