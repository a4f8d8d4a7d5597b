//! Exact rational arithmetic helpers.
//!
//! Every length, offset, mass and transform value in this crate is a
//! [`Rational`]. On the wire they are written as `"p/q"` strings (or `"p"`
//! when the denominator is one); decimals are rejected.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

/// `numer / denom` as a [`Rational`]. Panics on a zero denominator.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn square(x: &Rational) -> Rational {
    x * x
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

/// Parses `"p/q"` or `"p"`. Whitespace, decimal points and zero
/// denominators are rejected.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let ok = !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_digit() || c == '/' || c == '-' || c == '+');
    if !ok {
        return Err(format!("not a rational \"p/q\" string: {s:?}"));
    }
    if let Some((_, d)) = s.split_once('/') {
        if d.trim_start_matches(['+', '-']).chars().all(|c| c == '0') {
            return Err(format!("zero denominator in {s:?}"));
        }
    }
    Rational::from_str(s).map_err(|e| format!("invalid rational {s:?}: {e}"))
}

/// Serde adapter writing a [`Rational`] as a `"p/q"` string.
pub mod serde_str {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(serde::de::Error::custom)
    }
}

/// Largest integer `r` with `r * r <= n`, for `n >= 0`.
pub fn isqrt_floor(n: &BigInt) -> BigInt {
    if n.is_negative() {
        panic!("isqrt of negative number");
    }
    n.sqrt()
}

/// Decides `sqrt(a) + sqrt(b) >= sqrt(c)` exactly for nonnegative rationals.
///
/// Squaring twice: `a + b + 2 sqrt(ab) >= c` holds iff `c - a - b <= 0` or
/// `4ab >= (c - a - b)^2`.
pub fn sqrt_sum_dominates(a: &Rational, b: &Rational, c: &Rational) -> bool {
    let gap = c - a - b;
    if !gap.is_positive() {
        return true;
    }
    int(4) * a * b >= &gap * &gap
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
    }

    #[test]
    fn rejects_decimals_and_zero_denominators() {
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1 /2").is_err());
    }

    #[test]
    fn display_is_p_over_q() {
        assert_eq!(ratio(4, 2).to_string(), "2");
        assert_eq!(ratio(-1, 3).to_string(), "-1/3");
    }

    #[test]
    fn sqrt_sum_check() {
        // sqrt(1) + sqrt(1) = 2 >= sqrt(4)
        assert!(sqrt_sum_dominates(&int(1), &int(1), &int(4)));
        assert!(!sqrt_sum_dominates(&int(1), &int(1), &ratio(41, 10)));
        assert!(sqrt_sum_dominates(&int(2), &int(0), &int(2)));
        assert_eq!(isqrt_floor(&BigInt::from(17)), BigInt::from(4));
    }
}
