//! Exact rational helpers shared by every module.
//!
//! All timestamps, guard constants and polyhedron bounds are [`Rational`]s.
//! Decimal literals are converted exactly: `k` fractional digits give a
//! denominator of `10^k` before reduction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `123`, `0.5`, `-2.75`. No exponent, no leading `+`.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if body.contains('.') && (frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit())) {
        return None;
    }
    let digits: String = format!("{whole}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10u32), frac.len());
    let value = Rational::new(num, den);
    Some(if negative { -value } else { value })
}

/// Parses either a decimal literal or `num/den`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = parse_plain_int(n.trim())?;
        let d: BigInt = parse_plain_int(d.trim())?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    parse_decimal(text)
}

fn parse_plain_int(text: &str) -> Option<BigInt> {
    let body = text.strip_prefix('-').unwrap_or(text);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

/// Always `num/den`, lowest terms, positive denominator (`3` is `3/1`).
pub fn to_ratio_string(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Compact human form: `3`, `-7/10`.
pub fn to_display_string(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        to_ratio_string(value)
    }
}

/// Finite decimal expansion if one exists (denominator of the form 2^a 5^b).
pub fn to_decimal_string(value: &Rational) -> Option<String> {
    let mut den = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
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
    let digits = twos.max(fives);
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = value * Rational::from_integer(scale);
    let n = scaled.to_integer();
    let negative = n.is_negative();
    let mut s = n.abs().to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = format!("{}{}", "0".repeat(digits - s.len() + 1), s);
        }
        s.insert(s.len() - digits, '.');
    }
    if negative {
        s.insert(0, '-');
    }
    Some(s)
}

/// Decimal when exact, otherwise `num/den`.
pub fn to_literal_string(value: &Rational) -> String {
    to_decimal_string(value).unwrap_or_else(|| to_ratio_string(value))
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}
