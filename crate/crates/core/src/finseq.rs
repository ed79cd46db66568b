//! Finitely supported rational sequences on `ℤ⁺ = {0, 1, 2, ...}`.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::{self, Enclosure, Extended};
use crate::rat::{self, Rat};
use crate::stepfn::{NormIndex, StepFunction};

/// Sequence with canonical trailing-zero trimming.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "RawSeq", into = "RawSeq")]
pub struct FinSeq {
    entries: Vec<Rat>,
}

#[derive(Serialize, Deserialize)]
struct RawSeq {
    #[serde(with = "rat::serde_vec")]
    entries: Vec<Rat>,
}

impl From<RawSeq> for FinSeq {
    fn from(raw: RawSeq) -> Self {
        FinSeq::new(raw.entries)
    }
}

impl From<FinSeq> for RawSeq {
    fn from(s: FinSeq) -> Self {
        RawSeq { entries: s.entries }
    }
}

impl FinSeq {
    pub fn new(mut entries: Vec<Rat>) -> Self {
        while entries.last().is_some_and(|v| v.is_zero()) {
            entries.pop();
        }
        FinSeq { entries }
    }

    pub fn from_ints(v: &[i64]) -> Self {
        FinSeq::new(v.iter().map(|&x| rat::int(x)).collect())
    }

    pub fn zero() -> Self {
        FinSeq::default()
    }

    /// The unit vector `e_k`.
    pub fn unit(k: usize) -> Self {
        let mut v = vec![Rat::zero(); k + 1];
        v[k] = rat::one();
        FinSeq { entries: v }
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    /// One past the last nonzero index.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: usize) -> Rat {
        self.entries.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn map(&self, f: impl Fn(&Rat) -> Rat) -> FinSeq {
        FinSeq::new(self.entries.iter().map(f).collect())
    }

    pub fn abs(&self) -> FinSeq {
        self.map(|v| v.abs())
    }

    pub fn scale(&self, c: &Rat) -> FinSeq {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &FinSeq) -> FinSeq {
        let n = self.len().max(other.len());
        FinSeq::new((0..n).map(|k| self.get(k) + other.get(k)).collect())
    }

    /// `|a|^p` entrywise, exactly.
    pub fn pow(&self, p: &Rat) -> Result<FinSeq> {
        let mut out = Vec::with_capacity(self.len());
        for v in &self.entries {
            out.push(exact::pow_required(&v.abs(), p)?);
        }
        Ok(FinSeq::new(out))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|v| !v.is_negative())
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1] <= w[0])
    }

    /// Number of nonzero entries.
    pub fn support_size(&self) -> usize {
        self.entries.iter().filter(|v| !v.is_zero()).count()
    }

    /// Decreasing rearrangement of `|a|`.
    pub fn rearrange(&self) -> FinSeq {
        let mut v: Vec<Rat> = self.entries.iter().map(|x| x.abs()).collect();
        v.sort_by(|a, b| b.cmp(a));
        FinSeq::new(v)
    }

    /// Indices sorting `|a|` decreasingly (stable, ties by index).
    pub fn sorting_permutation(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&i, &j| self.entries[j].abs().cmp(&self.entries[i].abs()).then(i.cmp(&j)));
        idx
    }

    pub fn sum(&self) -> Rat {
        self.entries.iter().sum()
    }

    /// `Σ |a_k|^p` for finite `p > 0`.
    pub fn p_mass(&self, p: &Rat) -> Result<Enclosure> {
        let mut acc = Enclosure::zero();
        for v in &self.entries {
            if !v.is_zero() {
                acc = acc.add(&exact::pow_enclosure(&v.abs(), p)?);
            }
        }
        Ok(acc)
    }

    pub fn norm(&self, p: &NormIndex) -> Result<Enclosure> {
        match p {
            NormIndex::Zero => Ok(Enclosure::exact(Rat::from_integer(self.support_size().into()))),
            NormIndex::Infinity => {
                Ok(Enclosure::exact(self.entries.iter().map(|v| v.abs()).max().unwrap_or_else(Rat::zero)))
            }
            NormIndex::Finite(p) => self.p_mass(p)?.pow(&p.recip()),
        }
    }

    /// The embedding `i`: `a_n` on `[n, n+1)`.
    pub fn to_step(&self) -> StepFunction {
        StepFunction::from_parts(self.entries.iter().map(|v| (rat::one(), v.clone())).collect(), Rat::zero())
    }

    /// Cell averages `∫_n^{n+1} h` over the integer grid; `h` must vanish eventually.
    pub fn average_from_step(h: &StepFunction) -> Option<FinSeq> {
        if !h.tail().is_zero() {
            return None;
        }
        let span = h.span();
        let n = span.ceil().to_integer();
        let n: usize = n.try_into().ok()?;
        let mut prev = Rat::zero();
        let mut out = Vec::with_capacity(n);
        for k in 1..=n {
            let cur = h.prefix_integral(&rat::int(k as i64));
            out.push(&cur - &prev);
            prev = cur;
        }
        Some(FinSeq::new(out))
    }

    /// `Σ_{k ≥ n} |a_k|^q` in decreasing-rearrangement order.
    pub fn tail_sum(&self, n: usize, q: &Rat) -> Result<Extended> {
        let mu = self.rearrange();
        let mut acc = Enclosure::zero();
        for v in mu.entries.iter().skip(n) {
            acc = acc.add(&exact::pow_enclosure(v, q)?);
        }
        Ok(Extended::Finite(acc))
    }
}

impl fmt::Debug for FinSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FinSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(rat::format).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;

    #[test]
    fn trims_trailing_zeros() {
        let a = FinSeq::from_ints(&[1, 0, 2, 0, 0]);
        assert_eq!(a.len(), 3);
        assert_eq!(a.support_size(), 2);
        assert_eq!(a.rearrange(), FinSeq::from_ints(&[2, 1]));
    }

    #[test]
    fn embedding_roundtrip() {
        let a = FinSeq::from_ints(&[3, 0, 1]);
        assert_eq!(FinSeq::average_from_step(&a.to_step()), Some(a.clone()));
        assert_eq!(a.norm(&NormIndex::Finite(int(1))).unwrap(), Enclosure::exact(int(4)));
        assert_eq!(a.norm(&NormIndex::Zero).unwrap(), Enclosure::exact(int(2)));
    }

    #[test]
    fn json_format() {
        let a = FinSeq::new(vec![int(2), rat::frac(1, 2)]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"entries":["2","1/2"]}"#);
        assert_eq!(serde_json::from_str::<FinSeq>(&s).unwrap(), a);
    }
}
