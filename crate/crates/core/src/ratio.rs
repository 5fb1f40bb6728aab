//! Parsing, formatting, and serde plumbing for exact rationals.
//!
//! All external interfaces exchange rationals as strings: `"3"`, `"-5"`,
//! `"1/2"`, `"-7/3"`.  Internal code uses [`crate::Rat`] directly.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serializer};
use std::str::FromStr;

use crate::Rat;

/// Error for malformed rational strings.
#[derive(Debug, thiserror::Error)]
#[error("malformed rational `{input}`: {reason}")]
pub struct ParseRatError {
    pub input: String,
    pub reason: String,
}

/// Parse `"p"` or `"p/q"` into a reduced rational with positive denominator.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let bad = |reason: &str| ParseRatError {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(bad("empty string"));
    }
    let (num_s, den_s) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (t, None),
    };
    let numer = BigInt::from_str(num_s).map_err(|e| bad(&format!("numerator: {e}")))?;
    let denom = match den_s {
        Some(d) => BigInt::from_str(d).map_err(|e| bad(&format!("denominator: {e}")))?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Rat::new(numer, denom))
}

/// Format a rational as `"p"` (integral) or `"p/q"`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde adapter: a single rational as a string.  Use with
/// `#[serde(with = "crate::ratio::ratstr")]`.
pub mod ratstr {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(de)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rat>` as a list of strings.
pub mod ratstr_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rat], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(v.iter().map(fmt_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Rat>, D::Error> {
        let raw = Vec::<String>::deserialize(de)?;
        raw.iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, ratq};

    #[test]
    fn parses_and_formats_round_trip() {
        for s in ["0", "5", "-5", "1/2", "-7/3", "10/4"] {
            let r = parse_rat(s).unwrap();
            let back = parse_rat(&fmt_rat(&r)).unwrap();
            assert_eq!(r, back);
        }
        assert_eq!(parse_rat("10/4").unwrap(), ratq(5, 2));
        assert_eq!(parse_rat("-6/-3").unwrap(), rat(2));
        assert_eq!(fmt_rat(&ratq(5, 2)), "5/2");
        assert_eq!(fmt_rat(&rat(-4)), "-4");
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "a", "1/0", "1/2/3", "1.5"] {
            assert!(parse_rat(s).is_err(), "should reject {s:?}");
        }
    }
}
