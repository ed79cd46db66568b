//! Half-open intervals `[a, b)` on `(0, ∞)` and finite unions of them.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

/// `[start, end)`; `end = None` means `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "rat::serde_str")]
    pub start: Rat,
    #[serde(with = "rat::serde_opt")]
    pub end: Option<Rat>,
}

impl Interval {
    pub fn new(start: Rat, end: Rat) -> Self {
        debug_assert!(start <= end);
        Interval { start, end: Some(end) }
    }

    pub fn unbounded(start: Rat) -> Self {
        Interval { start, end: None }
    }

    pub fn is_empty(&self) -> bool {
        matches!(&self.end, Some(e) if *e <= self.start)
    }

    pub fn is_finite(&self) -> bool {
        self.end.is_some()
    }

    /// Length, `None` for unbounded intervals.
    pub fn length(&self) -> Option<Rat> {
        self.end.as_ref().map(|e| e - &self.start)
    }

    pub fn contains(&self, t: &Rat) -> bool {
        *t >= self.start && self.end.as_ref().is_none_or(|e| t < e)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let start = rat::max(&self.start, &other.start);
        let end = match (&self.end, &other.end) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => Some(rat::min(a, b)),
        };
        let iv = Interval { start, end };
        (!iv.is_empty()).then_some(iv)
    }

    /// `end <= other.start`.
    pub fn precedes(&self, other: &Interval) -> bool {
        matches!(&self.end, Some(e) if *e <= other.start)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.end {
            Some(e) => write!(f, "[{}, {})", rat::format(&self.start), rat::format(e)),
            None => write!(f, "[{}, inf)", rat::format(&self.start)),
        }
    }
}

/// Ordered, pairwise disjoint, non-adjacent union of nonempty intervals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawIntervalSet", into = "RawIntervalSet")]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

#[derive(Serialize, Deserialize)]
struct RawIntervalSet {
    intervals: Vec<Interval>,
}

impl TryFrom<RawIntervalSet> for IntervalSet {
    type Error = Error;

    fn try_from(raw: RawIntervalSet) -> Result<Self> {
        for iv in &raw.intervals {
            if iv.start.is_negative() {
                return Err(Error::Invalid(format!("interval {iv} starts below 0")));
            }
            if matches!(&iv.end, Some(e) if *e < iv.start) {
                return Err(Error::Invalid(format!("interval {iv} is reversed")));
            }
        }
        Ok(IntervalSet::from_intervals(raw.intervals))
    }
}

impl From<IntervalSet> for RawIntervalSet {
    fn from(s: IntervalSet) -> Self {
        RawIntervalSet { intervals: s.intervals }
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    /// The whole half-line `[0, ∞)`.
    pub fn half_line() -> Self {
        IntervalSet { intervals: vec![Interval::unbounded(Rat::zero())] }
    }

    pub fn single(iv: Interval) -> Self {
        IntervalSet::from_intervals(vec![iv])
    }

    /// Normalizes an arbitrary list: drops empties, sorts, merges overlaps and adjacency.
    pub fn from_intervals(mut ivs: Vec<Interval>) -> Self {
        ivs.retain(|iv| !iv.is_empty());
        ivs.sort_by(|a, b| a.start.cmp(&b.start));
        let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            if let Some(last) = out.last_mut() {
                let touches = match &last.end {
                    None => true,
                    Some(e) => iv.start <= *e,
                };
                if touches {
                    last.end = match (&last.end, &iv.end) {
                        (None, _) | (_, None) => None,
                        (Some(a), Some(b)) => Some(rat::max(a, b)),
                    };
                    continue;
                }
            }
            out.push(iv);
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure; `None` when infinite.
    pub fn measure(&self) -> Option<Rat> {
        let mut total = Rat::zero();
        for iv in &self.intervals {
            total += iv.length()?;
        }
        Some(total)
    }

    pub fn contains(&self, t: &Rat) -> bool {
        self.intervals.iter().any(|iv| iv.contains(t))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.intervals.clone();
        all.extend(other.intervals.iter().cloned());
        IntervalSet::from_intervals(all)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                if let Some(c) = a.intersect(b) {
                    out.push(c);
                }
            }
        }
        IntervalSet::from_intervals(out)
    }

    pub fn intersect_interval(&self, iv: &Interval) -> IntervalSet {
        self.intersect(&IntervalSet::single(iv.clone()))
    }

    /// Complement inside `[0, ∞)`.
    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::new();
        let mut cursor = Some(Rat::zero());
        for iv in &self.intervals {
            let Some(c) = cursor.clone() else { break };
            if iv.start > c {
                out.push(Interval::new(c, iv.start.clone()));
            }
            cursor = iv.end.clone();
        }
        if let Some(c) = cursor {
            out.push(Interval::unbounded(c));
        }
        IntervalSet::from_intervals(out)
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        self.intersect(&other.complement())
    }

    pub fn is_disjoint(&self, other: &IntervalSet) -> bool {
        self.intersect(other).is_empty()
    }

    /// All interval endpoints, sorted and deduplicated.
    pub fn endpoints(&self) -> Vec<Rat> {
        let mut pts = Vec::new();
        for iv in &self.intervals {
            pts.push(iv.start.clone());
            if let Some(e) = &iv.end {
                pts.push(e.clone());
            }
        }
        pts.sort();
        pts.dedup();
        pts
    }

    /// Measure of `self ∩ [0, t)`.
    pub fn measure_below(&self, t: &Rat) -> Rat {
        let mut total = Rat::zero();
        for iv in &self.intervals {
            if iv.start >= *t {
                break;
            }
            let end = match &iv.end {
                Some(e) => rat::min(e, t),
                None => t.clone(),
            };
            total += end - &iv.start;
        }
        total
    }

    /// Right end of the set, `None` if unbounded or empty.
    pub fn sup(&self) -> Option<Rat> {
        self.intervals.last().and_then(|iv| iv.end.clone())
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = self.intervals.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join(" ∪ "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    fn iv(a: i64, b: i64) -> Interval {
        Interval::new(int(a), int(b))
    }

    #[test]
    fn normalization_merges_adjacent() {
        let s = IntervalSet::from_intervals(vec![iv(2, 3), iv(0, 1), iv(1, 2), iv(5, 5)]);
        assert_eq!(s.intervals(), &[iv(0, 3)]);
    }

    #[test]
    fn complement_and_measure() {
        let s = IntervalSet::from_intervals(vec![iv(1, 2), iv(3, 4)]);
        let c = s.complement();
        assert_eq!(c.intervals().len(), 3);
        assert_eq!(c.measure(), None);
        assert_eq!(s.measure(), Some(int(2)));
        assert_eq!(s.measure_below(&frac(7, 2)), frac(3, 2));
        assert!(s.is_disjoint(&c));
        assert_eq!(s.union(&c), IntervalSet::half_line());
    }
}
