//! Piecewise-constant functions on `(0, ∞)` with exact rational breakpoints.
//!
//! A [`StepFunction`] is a finite list of `(length, value)` pieces laid out
//! from `0`, followed by a constant `tail` on the remaining infinite interval.
//! Pieces are half-open `[a, b)`, so every function is right-continuous. The
//! representation is canonical (no zero-length pieces, adjacent equal values
//! merged, no trailing pieces equal to the tail), which makes structural
//! equality coincide with equality of functions.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Enclosure, Extended};
use crate::interval::{Interval, IntervalSet};
use crate::rat::{self, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Piece {
    #[serde(with = "rat::serde_str")]
    pub len: Rat,
    #[serde(with = "rat::serde_str")]
    pub val: Rat,
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawStep", into = "RawStep")]
pub struct StepFunction {
    pieces: Vec<Piece>,
    tail: Rat,
}

#[derive(Serialize, Deserialize)]
struct RawStep {
    pieces: Vec<Piece>,
    #[serde(with = "rat::serde_str", default = "Rat::zero")]
    tail: Rat,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStep) -> Result<Self> {
        StepFunction::new(raw.pieces.into_iter().map(|p| (p.len, p.val)).collect(), raw.tail)
    }
}

impl From<StepFunction> for RawStep {
    fn from(f: StepFunction) -> Self {
        RawStep { pieces: f.pieces, tail: f.tail }
    }
}

/// Norm index `p ∈ {0} ∪ (0, ∞) ∪ {∞}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormIndex {
    Zero,
    Finite(Rat),
    Infinity,
}

impl NormIndex {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(NormIndex::Infinity),
            other => {
                let r = rat::parse(other)?;
                if r.is_zero() {
                    Ok(NormIndex::Zero)
                } else if r.is_positive() {
                    Ok(NormIndex::Finite(r))
                } else {
                    Err(Error::Invalid(format!("norm index must be >= 0, got {other}")))
                }
            }
        }
    }

    pub fn finite(p: Rat) -> Self {
        if p.is_zero() {
            NormIndex::Zero
        } else {
            NormIndex::Finite(p)
        }
    }
}

impl fmt::Display for NormIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormIndex::Zero => f.write_str("0"),
            NormIndex::Finite(p) => f.write_str(&rat::format(p)),
            NormIndex::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DilateDirection {
    /// `t ↦ f(t/n)`
    Expand,
    /// `t ↦ f(nt)`
    Contract,
}

impl StepFunction {
    /// Validated constructor: lengths must be positive.
    pub fn new(pieces: Vec<(Rat, Rat)>, tail: Rat) -> Result<Self> {
        for (len, _) in &pieces {
            if !len.is_positive() {
                return Err(Error::Invalid(format!("piece length {} is not positive", rat::format(len))));
            }
        }
        Ok(Self::from_parts(pieces, tail))
    }

    /// Canonicalizing constructor; zero-length pieces are dropped.
    pub fn from_parts(pieces: Vec<(Rat, Rat)>, tail: Rat) -> Self {
        let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
        for (len, val) in pieces {
            if len.is_zero() {
                continue;
            }
            debug_assert!(len.is_positive());
            if let Some(last) = out.last_mut() {
                if last.val == val {
                    last.len += len;
                    continue;
                }
            }
            out.push(Piece { len, val });
        }
        while out.last().is_some_and(|p| p.val == tail) {
            out.pop();
        }
        StepFunction { pieces: out, tail }
    }

    /// Values on `[x_i, x_{i+1})` for the sorted breakpoints `x_0 = 0 < x_1 < ...`.
    pub fn from_breakpoints(points: &[Rat], values: &[Rat], tail: Rat) -> Self {
        assert_eq!(points.len(), values.len() + 1);
        let pieces = points.windows(2).zip(values).map(|(w, v)| (&w[1] - &w[0], v.clone())).collect();
        Self::from_parts(pieces, tail)
    }

    pub fn zero() -> Self {
        StepFunction { pieces: Vec::new(), tail: Rat::zero() }
    }

    pub fn constant(c: Rat) -> Self {
        StepFunction { pieces: Vec::new(), tail: c }
    }

    /// `c·χ_[a,b)`.
    pub fn indicator(a: Rat, b: Rat, c: Rat) -> Self {
        Self::from_parts(vec![(a.clone(), Rat::zero()), (b - a, c)], Rat::zero())
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn tail(&self) -> &Rat {
        &self.tail
    }

    /// Position where the constant tail starts.
    pub fn span(&self) -> Rat {
        self.pieces.iter().map(|p| &p.len).sum()
    }

    /// `0 = x_0 < x_1 < ... < x_n = span`.
    pub fn breakpoints(&self) -> Vec<Rat> {
        let mut pts = Vec::with_capacity(self.pieces.len() + 1);
        let mut x = Rat::zero();
        pts.push(x.clone());
        for p in &self.pieces {
            x += &p.len;
            pts.push(x.clone());
        }
        pts
    }

    /// Every piece as an explicit interval, followed by the unbounded tail cell.
    pub fn cells(&self) -> Vec<(Interval, Rat)> {
        let mut out = Vec::with_capacity(self.pieces.len() + 1);
        let mut x = Rat::zero();
        for p in &self.pieces {
            let end = &x + &p.len;
            out.push((Interval::new(x.clone(), end.clone()), p.val.clone()));
            x = end;
        }
        out.push((Interval::unbounded(x), self.tail.clone()));
        out
    }

    /// Right-continuous evaluation at `t >= 0`.
    pub fn value_at(&self, t: &Rat) -> Rat {
        let mut x = Rat::zero();
        for p in &self.pieces {
            x += &p.len;
            if *t < x {
                return p.val.clone();
            }
        }
        self.tail.clone()
    }

    /// Left limit `f(t - 0)` for `t > 0`.
    pub fn left_limit(&self, t: &Rat) -> Rat {
        let mut x = Rat::zero();
        for p in &self.pieces {
            x += &p.len;
            if *t <= x {
                return p.val.clone();
            }
        }
        self.tail.clone()
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.tail.is_negative() && self.pieces.iter().all(|p| !p.val.is_negative())
    }

    /// Positionally non-increasing (as a function of `t`).
    pub fn is_nonincreasing(&self) -> bool {
        let mut prev: Option<&Rat> = None;
        for v in self.pieces.iter().map(|p| &p.val).chain(std::iter::once(&self.tail)) {
            if prev.is_some_and(|q| v > q) {
                return false;
            }
            prev = Some(v);
        }
        true
    }

    /// `f = μ(f)`: nonnegative and non-increasing.
    pub fn is_decreasing_rearrangement(&self) -> bool {
        self.is_nonnegative() && self.is_nonincreasing()
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty() && self.tail.is_zero()
    }

    /// Support as a union of intervals.
    pub fn support(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.cells().into_iter().filter(|(_, v)| !v.is_zero()).map(|(iv, _)| iv).collect())
    }

    pub fn map_values(&self, f: impl Fn(&Rat) -> Rat) -> StepFunction {
        Self::from_parts(self.pieces.iter().map(|p| (p.len.clone(), f(&p.val))).collect(), f(&self.tail))
    }

    pub fn try_map_values(&self, f: impl Fn(&Rat) -> Result<Rat>) -> Result<StepFunction> {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            pieces.push((p.len.clone(), f(&p.val)?));
        }
        Ok(Self::from_parts(pieces, f(&self.tail)?))
    }

    pub fn abs(&self) -> StepFunction {
        self.map_values(|v| v.abs())
    }

    pub fn scale(&self, c: &Rat) -> StepFunction {
        self.map_values(|v| v * c)
    }

    /// `|f|^p` with every value required to stay rational.
    pub fn pow(&self, p: &Rat) -> Result<StepFunction> {
        self.try_map_values(|v| exact::pow_required(&v.abs(), p))
    }

    /// Pointwise combination on the merged grid.
    pub fn zip_with(&self, other: &StepFunction, mut f: impl FnMut(&Rat, &Rat) -> Rat) -> StepFunction {
        // merge sweep over the two piece lists
        let (a, b) = (&self.pieces, &other.pieces);
        let (mut i, mut j) = (0, 0);
        let mut rem_a = a.first().map(|p| p.len.clone());
        let mut rem_b = b.first().map(|p| p.len.clone());
        let mut pieces = Vec::with_capacity(a.len() + b.len());
        loop {
            let va = a.get(i).map_or(&self.tail, |p| &p.val);
            let vb = b.get(j).map_or(&other.tail, |p| &p.val);
            let step = match (&rem_a, &rem_b) {
                (None, None) => break,
                (Some(x), None) => x.clone(),
                (None, Some(y)) => y.clone(),
                (Some(x), Some(y)) => rat::min(x, y),
            };
            pieces.push((step.clone(), f(va, vb)));
            if let Some(x) = rem_a.as_mut() {
                *x -= &step;
                if x.is_zero() {
                    i += 1;
                    rem_a = a.get(i).map(|p| p.len.clone());
                }
            }
            if let Some(y) = rem_b.as_mut() {
                *y -= &step;
                if y.is_zero() {
                    j += 1;
                    rem_b = b.get(j).map(|p| p.len.clone());
                }
            }
        }
        Self::from_parts(pieces, f(&self.tail, &other.tail))
    }

    pub fn add(&self, other: &StepFunction) -> StepFunction {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &StepFunction) -> StepFunction {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &StepFunction) -> StepFunction {
        self.zip_with(other, |a, b| a * b)
    }

    /// Pointwise `self / other` with `0/0 := 0`; a nonzero numerator over zero is an error.
    pub fn div(&self, other: &StepFunction) -> Result<StepFunction> {
        let mut bad = None;
        let out = self.zip_with(other, |a, b| {
            if b.is_zero() {
                if !a.is_zero() {
                    bad = Some(rat::format(a));
                }
                Rat::zero()
            } else {
                a / b
            }
        });
        match bad {
            Some(a) => Err(Error::Invalid(format!("division of {a} by zero"))),
            None => Ok(out),
        }
    }

    /// Refines the piece grid by the given points (merging is undone only
    /// logically; the canonical form is returned).
    fn values_on_grid(&self, pts: &[Rat]) -> Vec<Rat> {
        pts.windows(2).map(|w| self.value_at(&w[0])).collect()
    }

    /// `f·χ_set`.
    pub fn restrict(&self, set: &IntervalSet) -> StepFunction {
        let mut pts = self.breakpoints();
        pts.extend(set.endpoints());
        pts.sort();
        pts.dedup();
        let vals = self.values_on_grid(&pts);
        let mut pieces = Vec::with_capacity(vals.len());
        for (w, v) in pts.windows(2).zip(vals) {
            let v = if set.contains(&w[0]) { v } else { Rat::zero() };
            pieces.push((&w[1] - &w[0], v));
        }
        let last = pts.last().cloned().unwrap_or_else(Rat::zero);
        let tail = if set.contains(&last) { self.tail.clone() } else { Rat::zero() };
        Self::from_parts(pieces, tail)
    }

    /// `f` restricted to `set` and transported onto `[0, m(set))` by the
    /// increasing measure-preserving map that closes the gaps of `set`.
    pub fn compress(&self, set: &IntervalSet) -> StepFunction {
        let mut pieces = Vec::new();
        let mut tail = Rat::zero();
        for iv in set.intervals() {
            let mut pts = vec![iv.start.clone()];
            for x in self.breakpoints() {
                if x > iv.start && iv.end.as_ref().is_none_or(|e| x < *e) {
                    pts.push(x);
                }
            }
            match &iv.end {
                Some(e) => pts.push(e.clone()),
                None => tail = self.tail.clone(),
            }
            for w in pts.windows(2) {
                pieces.push((&w[1] - &w[0], self.value_at(&w[0])));
            }
            if iv.end.is_none() {
                let last = pts.last().unwrap().clone();
                let span = self.span();
                if last < span {
                    // remaining pieces of f beyond the last listed breakpoint
                    for (cell, v) in self.cells() {
                        if let Some(cell) = cell.intersect(&Interval::new(last.clone(), span.clone())) {
                            pieces.push((cell.length().unwrap(), v));
                        }
                    }
                }
            }
        }
        Self::from_parts(pieces, tail)
    }

    /// Inverse of [`StepFunction::compress`]: lays `h` (on `[0, m(set))`) back onto `set`.
    pub fn expand_onto(h: &StepFunction, set: &IntervalSet) -> StepFunction {
        let mut pieces = Vec::new();
        let mut cursor = Rat::zero();
        let mut offset = Rat::zero();
        let mut tail = Rat::zero();
        for iv in set.intervals() {
            if iv.start > cursor {
                pieces.push((&iv.start - &cursor, Rat::zero()));
            }
            match &iv.end {
                Some(e) => {
                    let len = e - &iv.start;
                    let seg = h.window(&offset, &(&offset + &len));
                    pieces.extend(seg);
                    offset += &len;
                    cursor = e.clone();
                }
                None => {
                    let span = h.span();
                    if span > offset {
                        pieces.extend(h.window(&offset, &span));
                    }
                    tail = h.tail.clone();
                    break;
                }
            }
        }
        Self::from_parts(pieces, tail)
    }

    /// Pieces of `f` on `[a, b)`, as `(len, value)` pairs.
    pub fn window(&self, a: &Rat, b: &Rat) -> Vec<(Rat, Rat)> {
        let target = Interval::new(a.clone(), b.clone());
        self.cells()
            .into_iter()
            .filter_map(|(cell, v)| cell.intersect(&target).map(|c| (c.length().unwrap(), v)))
            .collect()
    }

    /// Decreasing rearrangement `μ(f)` of `|f|`.
    ///
    /// With a positive tail `a = |tail|`, only pieces with `|v| > a` survive: the
    /// distribution function is infinite below `a`.
    pub fn rearrange(&self) -> StepFunction {
        let tail = self.tail.abs();
        let mut pieces: Vec<(Rat, Rat)> =
            self.pieces.iter().map(|p| (p.len.clone(), p.val.abs())).filter(|(_, v)| *v > tail).collect();
        pieces.sort_by(|a, b| b.1.cmp(&a.1));
        Self::from_parts(pieces, tail)
    }

    /// `∫_0^t f` (positional, no rearrangement); `f` may be signed.
    pub fn prefix_integral(&self, t: &Rat) -> Rat {
        let mut acc = Rat::zero();
        let mut x = Rat::zero();
        for p in &self.pieces {
            let end = &x + &p.len;
            if *t <= end {
                return acc + (t - &x) * &p.val;
            }
            acc += &p.len * &p.val;
            x = end;
        }
        if *t > x {
            acc += (t - &x) * &self.tail;
        }
        acc
    }

    /// `∫_0^t μ(f)`.
    pub fn head_integral(&self, t: &Rat) -> Rat {
        self.rearrange().prefix_integral(t)
    }

    /// Total integral `∫ f`, `None` when the tail is nonzero.
    pub fn integral(&self) -> Option<Rat> {
        if !self.tail.is_zero() {
            return None;
        }
        Some(self.pieces.iter().map(|p| &p.len * &p.val).sum())
    }

    /// `∫_t^∞ μ(|f|^q)`; `+∞` iff the tail is nonzero.
    pub fn tail_integral(&self, t: &Rat, q: &Rat) -> Result<Extended> {
        let mu = self.rearrange();
        if !mu.tail.is_zero() {
            return Ok(Extended::Infinite);
        }
        let mut acc = Enclosure::zero();
        let mut x = Rat::zero();
        for p in &mu.pieces {
            let end = &x + &p.len;
            if end > *t {
                let len = if *t > x { &end - t } else { p.len.clone() };
                acc = acc.add(&exact::pow_enclosure(&p.val, q)?.scale(&len));
            }
            x = end;
        }
        Ok(Extended::Finite(acc))
    }

    /// `∫ |f|^p` for finite `p > 0`.
    pub fn p_mass(&self, p: &Rat) -> Result<Extended> {
        if !self.tail.is_zero() {
            return Ok(Extended::Infinite);
        }
        let mut acc = Enclosure::zero();
        for piece in &self.pieces {
            if !piece.val.is_zero() {
                acc = acc.add(&exact::pow_enclosure(&piece.val.abs(), p)?.scale(&piece.len));
            }
        }
        Ok(Extended::Finite(acc))
    }

    /// `‖f‖_p`; `p = 0` gives the measure of the support.
    pub fn norm(&self, p: &NormIndex) -> Result<Extended> {
        match p {
            NormIndex::Zero => Ok(match self.support().measure() {
                Some(m) => Extended::exact(m),
                None => Extended::Infinite,
            }),
            NormIndex::Infinity => {
                let m = self
                    .pieces
                    .iter()
                    .map(|p| p.val.abs())
                    .chain(std::iter::once(self.tail.abs()))
                    .max()
                    .unwrap_or_else(Rat::zero);
                Ok(Extended::exact(m))
            }
            NormIndex::Finite(p) => match self.p_mass(p)? {
                Extended::Infinite => Ok(Extended::Infinite),
                Extended::Finite(mass) => Ok(Extended::Finite(mass.pow(&p.recip())?)),
            },
        }
    }

    /// Cell-wise `E[|f|^p | cell]` (the `p`-th power of the conditional expectation).
    ///
    /// `cells` must be pairwise disjoint and cover the support of `f`.
    pub fn cond_expectation_powers(&self, p: &Rat, cells: &[Interval]) -> Result<StepFunction> {
        let fp = self.pow(p)?;
        check_cells_disjoint(cells)?;
        let covered = IntervalSet::from_intervals(cells.to_vec());
        if !self.support().difference(&covered).is_empty() {
            return Err(Error::Precondition("grid does not cover supp(f)".into()));
        }
        let mut sorted = cells.to_vec();
        sorted.sort_by(|a, b| a.start.cmp(&b.start));
        let mut pieces = Vec::new();
        let mut cursor = Rat::zero();
        let mut tail = Rat::zero();
        for cell in &sorted {
            if cell.start > cursor {
                pieces.push((&cell.start - &cursor, Rat::zero()));
            }
            match cell.length() {
                None => {
                    let rest = fp.restrict(&IntervalSet::single(cell.clone()));
                    if !rest.is_zero() {
                        return Err(Error::Precondition(format!(
                            "cell {cell} has infinite measure and f is not zero on it"
                        )));
                    }
                    break;
                }
                Some(len) => {
                    let mass = fp.restrict(&IntervalSet::single(cell.clone())).integral().unwrap();
                    pieces.push((len.clone(), mass / &len));
                    cursor = cell.end.clone().unwrap();
                }
            }
        }
        if sorted.last().is_some_and(|c| c.end.is_none()) {
            tail = Rat::zero();
        }
        Ok(Self::from_parts(pieces, tail))
    }

    /// Conditional expectation `f₀` with `f₀^p = E[|f|^p | cell]`; the `p`-th root must be rational.
    pub fn cond_expectation(&self, p: &Rat, cells: &[Interval]) -> Result<StepFunction> {
        self.cond_expectation_powers(p, cells)?.pow(&p.recip())
    }

    /// Dilation: `Contract` gives `t ↦ f(nt)`, `Expand` gives `t ↦ f(t/n)`.
    pub fn dilate(&self, n: u64, direction: DilateDirection) -> StepFunction {
        assert!(n > 0, "dilation factor must be positive");
        let n = Rat::from_integer(BigInt::from(n));
        let factor = match direction {
            DilateDirection::Contract => n.recip(),
            DilateDirection::Expand => n,
        };
        Self::from_parts(self.pieces.iter().map(|p| (&p.len * &factor, p.val.clone())).collect(), self.tail.clone())
    }

    /// Measure of `{|f| > s}` (`None` if infinite).
    pub fn distribution(&self, s: &Rat) -> Option<Rat> {
        if self.tail.abs() > *s {
            return None;
        }
        Some(self.pieces.iter().filter(|p| p.val.abs() > *s).map(|p| &p.len).sum())
    }

    /// Cells of the σ-algebra generated by the half-integer dyadic level sets of
    /// `f` and `g`: the breakpoints `sup{t : f(t) >= 2^(n/2)}` over all `n ∈ ℤ`.
    ///
    /// Both functions must be non-increasing and nonnegative.
    pub fn dyadic_level_grid(f: &StepFunction, g: &StepFunction) -> Result<Vec<Interval>> {
        if !f.is_decreasing_rearrangement() || !g.is_decreasing_rearrangement() {
            return Err(Error::Precondition("level grid needs non-increasing inputs".into()));
        }
        let mut pts = vec![Rat::zero()];
        pts.extend(level_breaks(f));
        pts.extend(level_breaks(g));
        pts.sort();
        pts.dedup();
        let mut cells: Vec<Interval> = pts.windows(2).map(|w| Interval::new(w[0].clone(), w[1].clone())).collect();
        cells.push(Interval::unbounded(pts.last().unwrap().clone()));
        Ok(cells)
    }
}

/// `max{n ∈ ℤ : 2^(n/2) <= v}` for `v > 0`, i.e. `floor(log2(v²))`.
pub fn half_log2_floor(v: &Rat) -> i64 {
    let sq = v * v;
    let mut k = sq.numer().bits() as i64 - sq.denom().bits() as i64;
    // 2^k is within a factor 2 of sq; adjust exactly
    while rat::pow2(k) > sq {
        k -= 1;
    }
    while rat::pow2(k + 1) <= sq {
        k += 1;
    }
    k
}

fn level_breaks(f: &StepFunction) -> Vec<Rat> {
    let mut out = Vec::new();
    let bps = f.breakpoints();
    let vals: Vec<&Rat> = f.pieces.iter().map(|p| &p.val).chain(std::iter::once(&f.tail)).collect();
    for i in 0..f.pieces.len() {
        let (hi, lo) = (vals[i], vals[i + 1]);
        if hi.is_zero() {
            continue;
        }
        let crosses = lo.is_zero() || half_log2_floor(hi) > half_log2_floor(lo);
        if crosses {
            out.push(bps[i + 1].clone());
        }
    }
    out
}

fn check_cells_disjoint(cells: &[Interval]) -> Result<()> {
    let mut sorted = cells.to_vec();
    sorted.sort_by(|a, b| a.start.cmp(&b.start));
    for w in sorted.windows(2) {
        if !w[0].precedes(&w[1]) {
            return Err(Error::Invalid(format!("grid cells {} and {} overlap", w[0], w[1])));
        }
    }
    Ok(())
}

impl fmt::Debug for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.pieces.iter().map(|p| format!("{}x{}", rat::format(&p.val), rat::format(&p.len))).collect();
        write!(f, "[{}; tail {}]", parts.join(", "), rat::format(&self.tail))
    }
}

/// Sort order used for decreasing rearrangements: larger values first.
pub fn desc(a: &Rat, b: &Rat) -> Ordering {
    b.cmp(a)
}

impl Default for StepFunction {
    fn default() -> Self {
        StepFunction::zero()
    }
}

/// Convenience for tests and examples: `[(len, val), ...]` with zero tail.
pub fn step(pieces: &[(Rat, Rat)]) -> StepFunction {
    StepFunction::from_parts(pieces.to_vec(), Rat::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    fn sf(pieces: &[(i64, i64)]) -> StepFunction {
        step(&pieces.iter().map(|&(l, v)| (int(l), int(v))).collect::<Vec<_>>())
    }

    #[test]
    fn rearrange_two_pieces() {
        let f = sf(&[(1, 1), (1, 2)]);
        assert_eq!(f.rearrange(), sf(&[(1, 2), (1, 1)]));
        let g = sf(&[(1, 2), (1, 1)]);
        assert_eq!(g.rearrange(), g);
    }

    #[test]
    fn rearrange_drops_pieces_below_tail() {
        let f = StepFunction::from_parts(vec![(int(1), int(1)), (int(1), int(5))], int(2));
        let mu = f.rearrange();
        assert_eq!(mu, StepFunction::from_parts(vec![(int(1), int(5))], int(2)));
    }

    #[test]
    fn head_integral_examples() {
        assert_eq!(sf(&[(1, 1)]).head_integral(&int(2)), int(1));
        assert_eq!(sf(&[(1, 2), (1, 1)]).head_integral(&frac(3, 2)), frac(5, 2));
    }

    #[test]
    fn tail_integral_examples() {
        let f = sf(&[(2, 1)]);
        assert_eq!(f.tail_integral(&int(1), &int(1)).unwrap(), Extended::exact(int(1)));
        let g = StepFunction::constant(int(1));
        assert!(g.tail_integral(&int(5), &int(1)).unwrap().is_infinite());
    }

    #[test]
    fn norm_examples() {
        let f = sf(&[(2, 3)]);
        assert_eq!(f.norm(&NormIndex::Zero).unwrap(), Extended::exact(int(2)));
        assert_eq!(f.norm(&NormIndex::Infinity).unwrap(), Extended::exact(int(3)));
        assert_eq!(f.norm(&NormIndex::Finite(int(1))).unwrap(), Extended::exact(int(6)));
        // ‖3χ_(0,2)‖_2 = 3√2 is irrational: certified enclosure
        let e = f.norm(&NormIndex::Finite(int(2))).unwrap();
        let e = e.finite().unwrap();
        assert!(!e.is_exact());
        assert!(&e.lo * &e.lo <= int(18) && &e.hi * &e.hi >= int(18));
    }

    #[test]
    fn cond_expectation_examples() {
        let f = sf(&[(1, 2)]);
        let cells = vec![Interval::new(int(0), int(2))];
        assert_eq!(f.cond_expectation(&int(1), &cells).unwrap(), sf(&[(2, 1)]));
        let g = sf(&[(1, 3), (2, 1)]);
        let cells = vec![Interval::new(int(0), int(1)), Interval::new(int(1), int(3))];
        assert_eq!(g.cond_expectation(&int(2), &cells).unwrap(), g);
        let inf_cell = vec![Interval::unbounded(int(0))];
        assert!(StepFunction::constant(int(1)).cond_expectation(&int(1), &inf_cell).is_err());
    }

    #[test]
    fn dilate_examples() {
        assert_eq!(sf(&[(2, 1)]).dilate(2, DilateDirection::Contract), sf(&[(1, 1)]));
        assert_eq!(sf(&[(1, 1)]).dilate(3, DilateDirection::Expand), sf(&[(3, 1)]));
    }

    #[test]
    fn restrict_and_compress_roundtrip() {
        let f = sf(&[(1, 4), (2, 3), (1, 1)]);
        let set = IntervalSet::from_intervals(vec![Interval::new(frac(1, 2), int(1)), Interval::new(int(2), int(4))]);
        let c = f.compress(&set);
        assert_eq!(c, step(&[(frac(1, 2), int(4)), (int(1), int(3)), (int(1), int(1))]));
        assert_eq!(StepFunction::expand_onto(&c, &set), f.restrict(&set));
    }

    #[test]
    fn half_log2_levels() {
        assert_eq!(half_log2_floor(&int(1)), 0);
        assert_eq!(half_log2_floor(&int(2)), 2);
        assert_eq!(half_log2_floor(&frac(3, 2)), 1);
        assert_eq!(half_log2_floor(&frac(1, 2)), -2);
    }

    #[test]
    fn json_roundtrip_format() {
        let f = step(&[(frac(3, 2), int(2))]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"pieces":[{"len":"3/2","val":"2"}],"tail":"0"}"#);
        let back: StepFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<StepFunction>(r#"{"pieces":[{"len":"0","val":"1"}],"tail":"0"}"#).is_err());
    }
}
