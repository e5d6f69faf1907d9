//! Fixed-point money with four decimal places.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const SCALE: i64 = 10_000;

/// Amount of money stored as an integer count of 1/10000 units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);
    pub const MIN: Money = Money(i64::MIN);
    pub const MAX: Money = Money(i64::MAX);

    pub const fn from_units(units: i64) -> Self {
        Money(units)
    }

    pub const fn from_int(whole: i64) -> Self {
        Money(whole * SCALE)
    }

    /// Rounds to the nearest representable amount, halves away from zero.
    pub fn from_f64(value: f64) -> Self {
        Money((value * SCALE as f64).round() as i64)
    }

    pub const fn units(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn times(self, pieces: u64) -> Money {
        Money(self.0 * pieces as i64)
    }

    pub fn saturating_add(self, other: Money) -> Money {
        Money(self.0.saturating_add(other.0))
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Mul<u64> for Money {
    type Output = Money;
    fn mul(self, pieces: u64) -> Money {
        self.times(pieces)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let scale = SCALE as u64;
        write!(f, "{sign}{}.{:04}", abs / scale, abs % scale)
    }
}

impl FromStr for Money {
    type Err = String;

    /// Parses a plain decimal such as `-12.5` or `3.0125`; more than four
    /// fractional digits is an error.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
        if whole.is_empty() && frac.is_empty() {
            return Err(format!("not a decimal amount: {s:?}"));
        }
        if frac.len() > 4 {
            return Err(format!("more than four decimal places: {s:?}"));
        }
        let digits = |part: &str| part.chars().all(|c| c.is_ascii_digit());
        if !digits(whole) || !digits(frac) {
            return Err(format!("not a decimal amount: {s:?}"));
        }
        let whole: i64 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|e| format!("{s:?}: {e}"))?
        };
        let mut frac_units: i64 = 0;
        for (i, c) in frac.chars().enumerate() {
            frac_units += (c as i64 - '0' as i64) * 10_i64.pow(3 - i as u32);
        }
        let units = whole
            .checked_mul(SCALE)
            .and_then(|w| w.checked_add(frac_units))
            .ok_or_else(|| format!("amount out of range: {s:?}"))?;
        Ok(Money(if neg { -units } else { units }))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
            Float(f64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(i) => Ok(Money::from_int(i)),
            Repr::Float(x) => Ok(Money::from_f64(x)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        assert_eq!(Money::from_units(-12_345).to_string(), "-1.2345");
        assert_eq!(Money::from_int(7).to_string(), "7.0000");
        assert_eq!("3.5".parse::<Money>().unwrap(), Money::from_units(35_000));
        assert_eq!("-0.0001".parse::<Money>().unwrap(), Money::from_units(-1));
        assert!("1.00001".parse::<Money>().is_err());
        assert!("abc".parse::<Money>().is_err());
    }

    #[test]
    fn rounding_from_float() {
        assert_eq!(Money::from_f64(0.30004), Money::from_units(3000));
        assert_eq!(Money::from_f64(-2.5), Money::from_int(-2) - Money::from_units(5000));
    }
}
