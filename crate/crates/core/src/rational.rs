//! Exact money arithmetic and the decimal-string boundary.
//!
//! Every monetary quantity in the crate is a [`Rational`]. Values that come
//! from outside (JSON, CLI flags, floating-point distances) are quantized to
//! micro-units (10^-6) on the way in.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

/// Number of decimal places kept at the input/output boundary.
pub const DECIMAL_PLACES: u32 = 6;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid decimal string {0:?}")]
pub struct ParseDecimalError(pub String);

fn scale() -> BigInt {
    BigInt::from(10u64.pow(DECIMAL_PLACES))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Rounds to the nearest multiple of 10^-6, halves away from zero.
pub fn quantize(x: &Rational) -> Rational {
    let s = scale();
    let scaled = x * Rational::from_integer(s.clone());
    let floor = scaled.floor();
    let frac = &scaled - &floor;
    let half = ratio(1, 2);
    let mut units = floor.to_integer();
    if frac > half || (frac == half && scaled.is_positive()) {
        units += 1;
    }
    Rational::new(units, s)
}

/// Quantizes a float to micro-units. Non-finite input maps to zero.
pub fn from_f64(x: f64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let units = (x * 1e6).round();
    Rational::new(BigInt::from(units as i128), scale())
}

pub fn to_f64(x: &Rational) -> f64 {
    let n = x.numer().to_f64().unwrap_or(f64::NAN);
    let d = x.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        return n / d;
    }
    // Very large numerators or denominators: go through the quantized form.
    let q = quantize(x);
    q.numer().to_f64().unwrap_or(f64::NAN) / 1e6
}

/// Parses a plain decimal string (`-12.5`, `3`, `0.0000015`) and quantizes it.
pub fn parse_decimal(s: &str) -> Result<Rational, ParseDecimalError> {
    let err = || ParseDecimalError(s.to_string());
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    if body.is_empty() {
        return Err(err());
    }
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| err())? };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let mut value = Rational::new(numer, denom);
    if neg {
        value = -value;
    }
    Ok(quantize(&value))
}

/// Formats with exactly six decimal places (rounded half away from zero).
pub fn format_decimal(x: &Rational) -> String {
    let q = quantize(x);
    let units = q.numer() * (scale() / q.denom());
    let neg = units.is_negative();
    let (whole, frac) = units.abs().div_rem(&scale());
    format!("{}{}.{:0>width$}", if neg { "-" } else { "" }, whole, frac, width = DECIMAL_PLACES as usize)
}

pub fn sum<'a, I: IntoIterator<Item = &'a Rational>>(items: I) -> Rational {
    items.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}

pub fn is_binary(x: &Rational) -> bool {
    x.is_zero() || x.is_one()
}

/// Serde adapter: money as a decimal string.
pub mod decimal_string {
    use super::{format_decimal, parse_decimal, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_decimal(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_decimal(&raw).map_err(serde::de::Error::custom)
    }
}
