//! Exact powers of rationals and certified enclosures for the irrational ones.
//!
//! A rational power `x^(m/n)` is returned exactly whenever `x^m` is a perfect
//! `n`-th power; otherwise it is bracketed by two dyadic rationals at most
//! `2^-64` apart. Every comparison that the crate reports as decided is either
//! an exact rational comparison or a comparison of disjoint enclosures.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

/// Absolute width target for enclosures of irrational roots.
pub const PRECISION_BITS: u64 = 64;

/// `x^k` for an integer `k`; `x` must be nonzero when `k < 0`.
pub fn pow_int(x: &Rat, k: i64) -> Rat {
    if k >= 0 {
        num_traits::pow(x.clone(), k as usize)
    } else {
        num_traits::pow(x.recip(), k.unsigned_abs() as usize)
    }
}

fn exponent_parts(p: &Rat) -> Result<(i64, u32)> {
    let m: i64 =
        p.numer().try_into().map_err(|_| Error::Unsupported(format!("exponent {} too large", rat::format(p))))?;
    let n: u32 =
        p.denom().try_into().map_err(|_| Error::Unsupported(format!("exponent {} too large", rat::format(p))))?;
    Ok((m, n))
}

fn exact_int_root(x: &BigInt, n: u32) -> Option<BigInt> {
    let r = x.nth_root(n);
    if num_traits::pow(r.clone(), n as usize) == *x {
        Some(r)
    } else {
        None
    }
}

/// Exact `n`-th root of a nonnegative rational, if it is rational.
pub fn nth_root_exact(x: &Rat, n: u32) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    if n == 1 {
        return Some(x.clone());
    }
    let num = exact_int_root(x.numer(), n)?;
    let den = exact_int_root(x.denom(), n)?;
    Some(Rat::new(num, den))
}

/// Exact `x^p` for `x >= 0`, or `None` when the result is irrational.
///
/// `0^p` is `0` for `p > 0` and `1` for `p = 0`; negative powers of zero are `None`.
pub fn pow_exact(x: &Rat, p: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    if x.is_zero() {
        return match p.cmp(&Rat::zero()) {
            Ordering::Greater => Some(Rat::zero()),
            Ordering::Equal => Some(Rat::one()),
            Ordering::Less => None,
        };
    }
    let (m, n) = exponent_parts(p).ok()?;
    let base = nth_root_exact(x, n)?;
    Some(pow_int(&base, m))
}

/// Like [`pow_exact`] but reports which value/exponent pair was not representable.
pub fn pow_required(x: &Rat, p: &Rat) -> Result<Rat> {
    pow_exact(x, p).ok_or_else(|| Error::NotExact { value: rat::format(x), exponent: rat::format(p) })
}

/// Certified enclosure of the `n`-th root of `x >= 0`.
pub fn root_enclosure(x: &Rat, n: u32) -> Enclosure {
    if let Some(r) = nth_root_exact(x, n) {
        return Enclosure::exact(r);
    }
    // scale so that the floor of the scaled root is nonzero and the absolute width is <= 2^-64
    let mut bits = PRECISION_BITS;
    let den_bits = x.denom().bits();
    let num_bits = x.numer().bits();
    if den_bits > num_bits {
        bits += (den_bits - num_bits) / n as u64 + 2;
    }
    loop {
        let scaled = (x.numer() << (bits * n as u64) as usize).div_floor(x.denom());
        let r = scaled.nth_root(n);
        if !r.is_zero() {
            let unit = BigInt::one() << bits as usize;
            let lo = Rat::new(r.clone(), unit.clone());
            let hi = Rat::new(r + 1, unit);
            return Enclosure { lo, hi };
        }
        bits += 32;
    }
}

/// Certified enclosure of `x^p` for `x >= 0`; exact when the power is rational.
pub fn pow_enclosure(x: &Rat, p: &Rat) -> Result<Enclosure> {
    if x.is_negative() {
        return Err(Error::Invalid(format!("negative base {}", rat::format(x))));
    }
    if let Some(v) = pow_exact(x, p) {
        return Ok(Enclosure::exact(v));
    }
    if x.is_zero() {
        return Err(Error::Invalid("zero raised to a negative power".into()));
    }
    let (m, n) = exponent_parts(p)?;
    let powered = pow_int(x, m.abs());
    let root = root_enclosure(&powered, n);
    if m >= 0 {
        Ok(root)
    } else {
        Ok(Enclosure { lo: root.hi.recip(), hi: root.lo.recip() })
    }
}

/// A closed rational interval `[lo, hi]` known to contain a real quantity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Rat,
    pub hi: Rat,
}

impl Enclosure {
    pub fn exact(v: Rat) -> Self {
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn zero() -> Self {
        Self::exact(Rat::zero())
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        self.is_exact().then_some(&self.lo)
    }

    /// Widens the endpoints outward to multiples of `2^-bits`, keeping sums cheap.
    pub fn outward(&self, bits: u64) -> Enclosure {
        let scale = rat::pow2(bits as i64);
        Enclosure { lo: (&self.lo * &scale).floor() / &scale, hi: (&self.hi * &scale).ceil() / &scale }
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo }
    }

    pub fn add_rat(&self, r: &Rat) -> Enclosure {
        Enclosure { lo: &self.lo + r, hi: &self.hi + r }
    }

    pub fn scale(&self, c: &Rat) -> Enclosure {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            Enclosure { lo: a, hi: b }
        } else {
            Enclosure { lo: b, hi: a }
        }
    }

    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        if self.is_exact() {
            return other.scale(&self.lo);
        }
        if other.is_exact() {
            return self.scale(&other.lo);
        }
        let cands = [&self.lo * &other.lo, &self.lo * &other.hi, &self.hi * &other.lo, &self.hi * &other.hi];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Enclosure { lo, hi }
    }

    /// Enclosure of `v^p` for `v >= 0` in this interval.
    pub fn pow(&self, p: &Rat) -> Result<Enclosure> {
        if let Some(v) = self.as_exact() {
            return pow_enclosure(v, p);
        }
        if self.lo.is_negative() {
            return Err(Error::Invalid("power of a possibly negative enclosure".into()));
        }
        let a = pow_enclosure(&self.lo, p)?;
        let b = pow_enclosure(&self.hi, p)?;
        if p.is_negative() {
            Ok(Enclosure { lo: b.lo, hi: a.hi })
        } else {
            Ok(Enclosure { lo: a.lo, hi: b.hi })
        }
    }

    /// `Some(self <= other)` when decidable from the enclosures.
    pub fn le(&self, other: &Enclosure) -> Option<bool> {
        if self.hi <= other.lo {
            Some(true)
        } else if self.lo > other.hi {
            Some(false)
        } else {
            None
        }
    }

    pub fn le_rat(&self, r: &Rat) -> Option<bool> {
        self.le(&Enclosure::exact(r.clone()))
    }

    /// Like [`Enclosure::le`], but undecidable comparisons become an error.
    pub fn le_certified(&self, other: &Enclosure, what: &str) -> Result<bool> {
        self.le(other).ok_or_else(|| Error::Undecidable(format!("{what}: {self} vs {other}")))
    }

    pub fn max(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: rat::max(&self.lo, &other.lo), hi: rat::max(&self.hi, &other.hi) }
    }

    pub fn midpoint_f64(&self) -> f64 {
        (rat::to_f64(&self.lo) + rat::to_f64(&self.hi)) / 2.0
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", rat::format(&self.lo))
        } else {
            write!(f, "[{:.17e}, {:.17e}]", rat::to_f64(&self.lo), rat::to_f64(&self.hi))
        }
    }
}

/// A nonnegative quantity that may be `+∞` (norms, tail integrals).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extended {
    Finite(Enclosure),
    Infinite,
}

impl Extended {
    pub fn exact(v: Rat) -> Self {
        Extended::Finite(Enclosure::exact(v))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    pub fn finite(&self) -> Option<&Enclosure> {
        match self {
            Extended::Finite(e) => Some(e),
            Extended::Infinite => None,
        }
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        self.finite().and_then(Enclosure::as_exact)
    }

    /// `+∞ <= +∞` is taken as satisfied.
    pub fn le(&self, other: &Extended) -> Option<bool> {
        match (self, other) {
            (_, Extended::Infinite) => Some(true),
            (Extended::Infinite, Extended::Finite(_)) => Some(false),
            (Extended::Finite(a), Extended::Finite(b)) => a.le(b),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Extended::Finite(e) => e.midpoint_f64(),
            Extended::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(e) => e.fmt(f),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

/// Product of rational powers `Π base_i^exp_i`, used for bounds such as `2·3^(1/p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerProduct {
    factors: Vec<(Rat, Rat)>,
}

impl PowerProduct {
    pub fn one() -> Self {
        PowerProduct { factors: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        PowerProduct::one().times(c, Rat::one())
    }

    /// Multiplies by `base^exp`; `base` must be positive.
    pub fn times(mut self, base: Rat, exp: Rat) -> Self {
        assert!(base.is_positive(), "power product bases must be positive");
        self.factors.push((base, exp));
        self
    }

    /// `(Π b^e)^p`.
    pub fn pow(&self, p: &Rat) -> Self {
        PowerProduct { factors: self.factors.iter().map(|(b, e)| (b.clone(), e * p)).collect() }
    }

    fn common_denominator(&self) -> BigInt {
        self.factors.iter().fold(BigInt::one(), |acc, (_, e)| acc.lcm(e.denom()))
    }

    /// `(N, (Π b^e)^N)` with `N` the least common denominator of the exponents.
    fn integral_power(&self) -> (usize, Rat) {
        let n = self.common_denominator();
        let n_usize: usize = (&n).try_into().expect("exponent denominators are small");
        let mut value = Rat::one();
        for (b, e) in &self.factors {
            let k = e * Rat::from_integer(n.clone());
            let k: i64 = k.to_integer().try_into().expect("exponents are small");
            value *= pow_int(b, k);
        }
        (n_usize, value)
    }

    /// Exact decision of `x <= Π b^e` for `x >= 0` by raising both sides to the
    /// common denominator of the exponents.
    pub fn ge_rat(&self, x: &Rat) -> bool {
        if x.is_negative() {
            return true;
        }
        let (n, rhs) = self.integral_power();
        num_traits::pow(x.clone(), n) <= rhs
    }

    /// `Some(x <= bound)` for an enclosed `x >= 0`; exact when `x` is exact.
    pub fn ge_enclosure(&self, x: &Enclosure) -> Option<bool> {
        if let Some(v) = x.as_exact() {
            return Some(self.ge_rat(v));
        }
        if self.ge_rat(&x.hi) {
            Some(true)
        } else if !self.ge_rat(&x.lo) {
            Some(false)
        } else {
            None
        }
    }

    pub fn to_enclosure(&self) -> Result<Enclosure> {
        let mut acc = Enclosure::exact(Rat::one());
        for (b, e) in &self.factors {
            acc = acc.mul(&pow_enclosure(b, e)?);
        }
        Ok(acc)
    }

    pub fn to_f64(&self) -> f64 {
        self.factors.iter().map(|(b, e)| rat::to_f64(b).powf(rat::to_f64(e))).product()
    }
}

impl fmt::Display for PowerProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(b, e)| if e.is_one() { rat::format(b) } else { format!("{}^({})", rat::format(b), rat::format(e)) })
            .collect();
        f.write_str(&parts.join("·"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    #[test]
    fn exact_powers() {
        assert_eq!(pow_exact(&frac(4, 9), &frac(1, 2)), Some(frac(2, 3)));
        assert_eq!(pow_exact(&frac(8, 27), &frac(2, 3)), Some(frac(4, 9)));
        assert_eq!(pow_exact(&int(2), &frac(1, 2)), None);
        assert_eq!(pow_exact(&int(2), &int(-2)), Some(frac(1, 4)));
        assert_eq!(pow_exact(&int(0), &frac(1, 2)), Some(int(0)));
    }

    #[test]
    fn sqrt2_enclosure_is_tight_and_certified() {
        let e = root_enclosure(&int(2), 2);
        assert!(e.width() <= crate::rat::pow2(-64));
        assert!(&e.lo * &e.lo < int(2));
        assert!(&e.hi * &e.hi > int(2));
    }

    #[test]
    fn tiny_values_keep_positive_lower_bound() {
        let x = Rat::new(BigInt::from(3), BigInt::one() << 200usize);
        let e = root_enclosure(&x, 2);
        assert!(e.lo.is_positive());
        assert!(&e.lo * &e.lo <= x && &e.hi * &e.hi >= x);
    }

    #[test]
    fn power_product_comparisons() {
        // 2·3^(1/2) ≈ 3.4641
        let b = PowerProduct::constant(int(2)).times(int(3), frac(1, 2));
        assert!(b.ge_rat(&frac(346, 100)));
        assert!(!b.ge_rat(&frac(347, 100)));
        // square root of the bound: 2^(1/2)·3^(1/4) ≈ 1.8612
        let bp = b.pow(&frac(1, 2));
        assert!(bp.ge_rat(&frac(1861, 1000)));
        assert!(!bp.ge_rat(&frac(1862, 1000)));
        assert!(PowerProduct::constant(int(4)).ge_rat(&int(4)));
    }
}
