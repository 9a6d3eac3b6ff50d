//! Exact scalar arithmetic shared by the planar calculus.
//!
//! Every coordinate, shear power, valuation and series exponent in this crate
//! is an arbitrary-precision rational; floating point is confined to the
//! numerical local models.  This module fixes the wire format for those
//! scalars:
//!
//! - rationals travel as `"p/q"` strings, always reduced, `q > 0` (a bare
//!   integer `"p"` is accepted on input);
//! - integers travel as JSON numbers when they fit in an `i64` and as decimal
//!   strings otherwise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::str::FromStr;

pub type Int = BigInt;
pub type Rat = BigRational;

/// `n/d` as an exact rational.  Panics on `d == 0`; intended for literals.
#[inline]
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer `n` as an exact rational.
#[inline]
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

#[inline]
pub fn int(n: i64) -> Int {
    BigInt::from(n)
}

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    match s.split_once('/') {
        Some((num, den)) => {
            let n = BigInt::from_str(num.trim()).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
            let d = BigInt::from_str(den.trim()).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
            if d.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(Rat::new(n, d))
        }
        None => {
            let n = BigInt::from_str(s).map_err(|e| format!("bad rational {s:?}: {e}"))?;
            Ok(Rat::from_integer(n))
        }
    }
}

/// Canonical `"p/q"` rendering: reduced, denominator always present and positive.
pub fn fmt_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Serde adapter: `Rat` as a `"p/q"` string.
pub mod rat_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(D::Error::custom)
    }
}

/// A rational in wire form: always a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WireRat(pub Rat);

impl Serialize for WireRat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(&self.0))
    }
}

impl<'de> Deserialize<'de> for WireRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map(WireRat).map_err(D::Error::custom)
    }
}

/// An integer in wire form: JSON number when it fits `i64`, decimal string otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireInt(pub Int);

impl Serialize for WireInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(n) => s.serialize_i64(n),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for WireInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Number(n) => {
                let i = n
                    .as_i64()
                    .ok_or_else(|| D::Error::custom(format!("non-integer number {n}")))?;
                Ok(WireInt(BigInt::from(i)))
            }
            serde_json::Value::String(s) => BigInt::from_str(s.trim())
                .map(WireInt)
                .map_err(|e| D::Error::custom(format!("bad integer {s:?}: {e}"))),
            other => Err(D::Error::custom(format!("expected integer, got {other}"))),
        }
    }
}

/// True when `r` is an integer.
#[inline]
pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// Sign of a rational as -1 / 0 / +1.
#[inline]
pub fn sign(r: &Rat) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}
