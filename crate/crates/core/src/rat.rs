//! Exact rational scalars and their `"num/den"` string encoding.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rat = BigRational;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// `2^k` for any integer `k`.
pub fn pow2(k: i64) -> Rat {
    let base = BigInt::one() << k.unsigned_abs();
    if k >= 0 {
        Rat::from_integer(base)
    } else {
        Rat::new(BigInt::one(), base)
    }
}

pub fn min(a: &Rat, b: &Rat) -> Rat {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max(a: &Rat, b: &Rat) -> Rat {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Parses `"3"`, `"-3/2"`, or a finite decimal such as `"0.25"`.
pub fn parse(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational literal {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.starts_with('-');
        let ip_abs = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip_abs.is_empty() { BigInt::zero() } else { ip_abs.parse().map_err(|_| bad())? };
        let frac_part: BigInt = fp.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let mag = Rat::new(whole * &scale + frac_part, scale);
        return Ok(if neg { -mag } else { mag });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(n))
}

/// Canonical `"num/den"` form; integers are printed without a denominator.
pub fn format(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rat) -> f64 {
    match r.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => {
            // huge numerator/denominator: scale down through bit lengths
            let nb = r.numer().bits() as i64;
            let db = r.denom().bits() as i64;
            let shift = nb.max(db) - 60;
            let n = (r.numer() >> shift.max(0) as usize).to_f64().unwrap_or(0.0);
            let d = (r.denom() >> shift.max(0) as usize).to_f64().unwrap_or(1.0);
            if d == 0.0 {
                f64::INFINITY * n.signum()
            } else {
                n / d
            }
        }
    }
}

/// Rational approximation of a finite float (exact binary expansion).
pub fn from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

pub fn is_nonneg(r: &Rat) -> bool {
    !r.is_negative()
}

/// Display adapter for `Rat`.
pub struct Show<'a>(pub &'a Rat);

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(self.0))
    }
}

/// `#[serde(with = "rat::serde_str")]` helper.
pub mod serde_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let raw = RatLiteral::deserialize(d)?;
        raw.into_rat().map_err(serde::de::Error::custom)
    }

    /// Accepts both `"3/2"` strings and bare JSON integers.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum RatLiteral {
        Str(String),
        Int(i64),
    }

    impl RatLiteral {
        pub(crate) fn into_rat(self) -> Result<Rat> {
            match self {
                RatLiteral::Str(s) => parse(&s),
                RatLiteral::Int(i) => Ok(int(i)),
            }
        }
    }
}

/// Same as [`serde_str`] for `Option<Rat>`, where `None` encodes `+∞`.
pub mod serde_opt {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&format(r)),
            None => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rat>, D::Error> {
        let raw = serde_str::RatLiteral::deserialize(d)?;
        match raw {
            serde_str::RatLiteral::Str(s) if s == "inf" => Ok(None),
            other => other.into_rat().map(Some).map_err(serde::de::Error::custom),
        }
    }
}

/// `Vec<Rat>` as a list of strings.
pub mod serde_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let raw = Vec::<serde_str::RatLiteral>::deserialize(d)?;
        raw.into_iter().map(|r| r.into_rat().map_err(serde::de::Error::custom)).collect()
    }
}

pub fn abs(r: &Rat) -> Rat {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/2").unwrap(), frac(3, 2));
        assert_eq!(parse("-6/4").unwrap(), frac(-3, 2));
        assert_eq!(parse("0.25").unwrap(), frac(1, 4));
        assert_eq!(parse("-0.5").unwrap(), frac(-1, 2));
        assert_eq!(parse("7").unwrap(), int(7));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
    }

    #[test]
    fn format_is_lowest_terms() {
        assert_eq!(format(&frac(4, 6)), "2/3");
        assert_eq!(format(&int(-5)), "-5");
        assert_eq!(format(&pow2(-3)), "1/8");
    }
}
