//! Exact rational arithmetic for split fractions, prevalences, and dropout.
//!
//! Split ratios like 2:1 must not pick up off-by-one ceilings through binary
//! floating point (1/3 has no finite binary expansion), so every fraction a
//! plan depends on is stored as an exact `i128` ratio. Decimal and percent
//! inputs ("0.25", "85%", "3/4") are parsed exactly.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::Result;

/// Budgets for parsed literals: significant digits of the mantissa and the
/// total decimal scale. Shortest-round-trip f64 output needs 17 significant
/// digits; the caps keep downstream i128 products comfortably in range.
const MAX_SIG_DIGITS: usize = 24;
const MAX_SCALE: u32 = 32;

/// An exact rational number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i128>);

impl Rational {
    /// Construct `num/den`; rejects a zero denominator.
    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::invalid("rational denominator must be nonzero"));
        }
        Ok(Rational(Ratio::new(num, den)))
    }

    pub fn from_integer(n: i128) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn zero() -> Self {
        Rational(Ratio::zero())
    }

    pub fn one() -> Self {
        Rational(Ratio::from_integer(1))
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

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Nearest f64; fine for formulas, never used where exactness matters.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest integer >= self, as u64; rejects negative values and overflow.
    pub fn ceil_u64(&self) -> Result<u64> {
        if self.0.is_negative() {
            return Err(Error::invalid(format!(
                "cannot take a nonnegative ceiling of {self}"
            )));
        }
        let c = num_integer::Integer::div_ceil(self.0.numer(), self.0.denom());
        u64::try_from(c)
            .map_err(|_| Error::invalid(format!("ceiling of {self} exceeds the supported range")))
    }
}

/// ceil(n * r) in exact integer arithmetic; rejects r <= 0 and overflow.
pub fn mul_int_ceil(n: u64, r: Rational) -> Result<u64> {
    if !r.is_positive() {
        return Err(Error::invalid(format!(
            "multiplier must be positive, got {r}"
        )));
    }
    let prod = i128::from(n)
        .checked_mul(r.numer())
        .ok_or_else(|| Error::invalid("rational product exceeds the supported range"))?;
    let c = num_integer::Integer::div_ceil(&prod, &r.denom());
    u64::try_from(c).map_err(|_| Error::invalid("ceiling exceeds the supported range"))
}

/// ceil(n / r) in exact integer arithmetic; rejects r <= 0 and overflow.
pub fn div_int_ceil(n: u64, r: Rational) -> Result<u64> {
    if !r.is_positive() {
        return Err(Error::invalid(format!("divisor must be positive, got {r}")));
    }
    let prod = i128::from(n)
        .checked_mul(r.denom())
        .ok_or_else(|| Error::invalid("rational quotient exceeds the supported range"))?;
    let c = num_integer::Integer::div_ceil(&prod, &r.numer());
    u64::try_from(c).map_err(|_| Error::invalid("ceiling exceeds the supported range"))
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
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

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts integers ("3"), fractions ("3/4"), decimals ("0.25"),
    /// scientific notation ("1e-2"), and a percent suffix on any of those
    /// ("85%", "12.5%"), all parsed exactly.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::invalid("empty rational literal"));
        }
        let (body, percent) = match s.strip_suffix('%') {
            Some(rest) => (rest.trim(), true),
            None => (s, false),
        };
        let value = if let Some((num, den)) = body.split_once('/') {
            let n = parse_decimal(num.trim())?;
            let d = parse_decimal(den.trim())?;
            if d.is_zero() {
                return Err(Error::invalid(format!("zero denominator in '{s}'")));
            }
            n / d
        } else {
            parse_decimal(body)?
        };
        if percent {
            Ok(value / Rational::from_integer(100))
        } else {
            Ok(value)
        }
    }
}

/// Parse a (possibly signed) decimal literal with optional exponent into an
/// exact rational.
fn parse_decimal(s: &str) -> Result<Rational> {
    if s.is_empty() {
        return Err(Error::invalid("empty numeric literal"));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i32 = e
                .parse()
                .map_err(|_| Error::invalid(format!("bad exponent in '{s}'")))?;
            if exp.unsigned_abs() > MAX_SCALE {
                return Err(Error::invalid(format!("exponent out of range in '{s}'")));
            }
            (m, exp)
        }
        None => (s, 0),
    };

    let (digits, negative) = match mantissa.strip_prefix('-') {
        Some(rest) => (rest, true),
        None => (mantissa.strip_prefix('+').unwrap_or(mantissa), false),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::invalid(format!("no digits in '{s}'")));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::invalid(format!("invalid numeric literal '{s}'")));
    }
    let significant = int_part
        .chars()
        .chain(frac_part.chars())
        .skip_while(|c| *c == '0')
        .count();
    if significant > MAX_SIG_DIGITS {
        return Err(Error::invalid(format!(
            "numeric literal '{s}' has more than {MAX_SIG_DIGITS} significant digits"
        )));
    }

    let mut numer: i128 = 0;
    for c in int_part.chars().chain(frac_part.chars()) {
        numer = numer * 10 + i128::from(c.to_digit(10).unwrap());
    }
    if negative {
        numer = -numer;
    }

    // fold the exponent into the decimal scale, keeping everything integral
    let scale = frac_part.len() as i64 - i64::from(exp);
    if scale.unsigned_abs() > u64::from(MAX_SCALE) {
        return Err(Error::invalid(format!("scale out of range in '{s}'")));
    }
    let value = if scale >= 0 {
        Rational(Ratio::new(numer, 10_i128.pow(scale as u32)))
    } else {
        let factor = 10_i128.pow((-scale) as u32);
        let scaled = numer
            .checked_mul(factor)
            .ok_or_else(|| Error::invalid(format!("literal '{s}' is out of range")))?;
        Rational(Ratio::from_integer(scaled))
    };
    Ok(value)
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational as a string (\"3/4\", \"0.25\", \"85%\") or a number")
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
                Ok(Rational::from_integer(i128::from(v)))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
                Ok(Rational::from_integer(i128::from(v)))
            }

            fn visit_f64<E: serde::de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
                if !v.is_finite() {
                    return Err(E::custom("rational must be finite"));
                }
                // Shortest round-trip decimal of the written value, parsed exactly.
                format!("{v}").parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}
