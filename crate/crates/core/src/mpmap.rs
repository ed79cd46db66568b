//! Piecewise-affine measure-preserving maps between subsets of `(0, ∞)`.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::rat::{self, Rat};
use crate::stepfn::StepFunction;

/// One affine branch: `source` is mapped onto `target` with slope `+1`
/// (or `-1` when `reversed`, finite pieces only).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapPiece {
    pub source: Interval,
    pub target: Interval,
    #[serde(default)]
    pub reversed: bool,
}

impl MapPiece {
    /// Image of a point of the source interval.
    pub fn image(&self, t: &Rat) -> Rat {
        if self.reversed {
            let end = self.target.end.as_ref().expect("reversed pieces are finite");
            end - (t - &self.source.start)
        } else {
            &self.target.start + (t - &self.source.start)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMap", into = "RawMap")]
pub struct MPMap {
    pieces: Vec<MapPiece>,
}

#[derive(Serialize, Deserialize)]
struct RawMap {
    pieces: Vec<MapPiece>,
}

impl TryFrom<RawMap> for MPMap {
    type Error = Error;
    fn try_from(raw: RawMap) -> Result<Self> {
        MPMap::new(raw.pieces)
    }
}

impl From<MPMap> for RawMap {
    fn from(m: MPMap) -> Self {
        RawMap { pieces: m.pieces }
    }
}

fn disjoint(ivs: &mut [Interval]) -> bool {
    ivs.sort_by(|a, b| a.start.cmp(&b.start));
    ivs.windows(2).all(|w| w[0].precedes(&w[1]))
}

impl MPMap {
    /// Validates equal lengths and disjointness of sources and of targets.
    pub fn new(pieces: Vec<MapPiece>) -> Result<Self> {
        for p in &pieces {
            if p.source.is_empty() || p.source.start.is_negative() || p.target.start.is_negative() {
                return Err(Error::Invalid(format!("bad map piece {} -> {}", p.source, p.target)));
            }
            if p.source.length() != p.target.length() {
                return Err(Error::Invalid(format!("map piece {} -> {} does not preserve length", p.source, p.target)));
            }
            if p.reversed && !p.source.is_finite() {
                return Err(Error::Invalid("reversed map pieces must be finite".into()));
            }
        }
        let mut src: Vec<Interval> = pieces.iter().map(|p| p.source.clone()).collect();
        let mut dst: Vec<Interval> = pieces.iter().map(|p| p.target.clone()).collect();
        if !disjoint(&mut src) || !disjoint(&mut dst) {
            return Err(Error::Invalid("map sources or targets overlap".into()));
        }
        let mut sorted = pieces;
        sorted.sort_by(|a, b| a.source.start.cmp(&b.source.start));
        // merge translations that continue each other
        let mut pieces: Vec<MapPiece> = Vec::with_capacity(sorted.len());
        for p in sorted {
            if let Some(last) = pieces.last_mut() {
                let joins = !last.reversed
                    && !p.reversed
                    && last.source.end.as_ref() == Some(&p.source.start)
                    && last.target.end.as_ref() == Some(&p.target.start);
                if joins {
                    last.source.end = p.source.end;
                    last.target.end = p.target.end;
                    continue;
                }
            }
            pieces.push(p);
        }
        Ok(MPMap { pieces })
    }

    pub fn identity(set: &IntervalSet) -> Self {
        MPMap {
            pieces: set
                .intervals()
                .iter()
                .map(|iv| MapPiece { source: iv.clone(), target: iv.clone(), reversed: false })
                .collect(),
        }
    }

    /// Increasing map closing the gaps of `set`: `[0, m(set)) -> set`.
    pub fn packing(set: &IntervalSet) -> Self {
        let mut pieces = Vec::new();
        let mut offset = Rat::zero();
        for iv in set.intervals() {
            let source = match iv.length() {
                Some(len) => {
                    let s = Interval::new(offset.clone(), &offset + &len);
                    offset += len;
                    s
                }
                None => Interval::unbounded(offset.clone()),
            };
            pieces.push(MapPiece { source, target: iv.clone(), reversed: false });
        }
        MPMap { pieces }
    }

    pub fn pieces(&self) -> &[MapPiece] {
        &self.pieces
    }

    pub fn source_set(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.pieces.iter().map(|p| p.source.clone()).collect())
    }

    pub fn target_set(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.pieces.iter().map(|p| p.target.clone()).collect())
    }

    pub fn image(&self, t: &Rat) -> Option<Rat> {
        self.pieces.iter().find(|p| p.source.contains(t)).map(|p| p.image(t))
    }

    pub fn inverse(&self) -> MPMap {
        let mut pieces: Vec<MapPiece> = self
            .pieces
            .iter()
            .map(|p| MapPiece { source: p.target.clone(), target: p.source.clone(), reversed: p.reversed })
            .collect();
        pieces.sort_by(|a, b| a.source.start.cmp(&b.source.start));
        MPMap { pieces }
    }

    /// `(f∘ω)·χ_sources`.
    pub fn pullback(&self, f: &StepFunction) -> StepFunction {
        let mut pieces: Vec<(Rat, Rat)> = Vec::new();
        let mut cursor = Rat::zero();
        let mut tail = Rat::zero();
        for p in &self.pieces {
            if p.source.start > cursor {
                pieces.push((&p.source.start - &cursor, Rat::zero()));
            }
            match &p.target.end {
                Some(end) => {
                    let mut seg = f.window(&p.target.start, end);
                    if p.reversed {
                        seg.reverse();
                    }
                    pieces.extend(seg);
                    cursor = p.source.end.clone().unwrap();
                }
                None => {
                    let span = f.span();
                    if span > p.target.start {
                        pieces.extend(f.window(&p.target.start, &span));
                    }
                    tail = f.tail().clone();
                    break;
                }
            }
        }
        StepFunction::from_parts(pieces, tail)
    }
}

impl fmt::Display for MPMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pieces
            .iter()
            .map(|p| format!("{}->{}{}", p.source, p.target, if p.reversed { "(rev)" } else { "" }))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

/// Level-set cells `{h = v}` for each value, in positional order.
fn level_cells(h: &StepFunction, keep: impl Fn(&Rat) -> bool) -> Vec<Interval> {
    h.cells().into_iter().filter(|(_, v)| keep(v)).map(|(iv, _)| iv).collect()
}

/// Greedy order-preserving matching of two interval lists of equal total measure.
fn match_cells(src: &[Interval], dst: &[Interval], out: &mut Vec<MapPiece>) -> Result<()> {
    let mut src: Vec<Interval> = src.to_vec();
    let mut dst: Vec<Interval> = dst.to_vec();
    src.reverse();
    dst.reverse();
    while !src.is_empty() && !dst.is_empty() {
        let (s, d) = (src.pop().unwrap(), dst.pop().unwrap());
        match (s.length(), d.length()) {
            (None, None) => {
                out.push(MapPiece { source: s, target: d, reversed: false });
            }
            (Some(ls), Some(ld)) if ls == ld => out.push(MapPiece { source: s, target: d, reversed: false }),
            (ls, ld) => {
                let take = match (&ls, &ld) {
                    (Some(a), Some(b)) => rat::min(a, b),
                    (Some(a), None) => a.clone(),
                    (None, Some(b)) => b.clone(),
                    (None, None) => unreachable!(),
                };
                let s_cut = Interval::new(s.start.clone(), &s.start + &take);
                let d_cut = Interval::new(d.start.clone(), &d.start + &take);
                out.push(MapPiece { source: s_cut, target: d_cut, reversed: false });
                if ls.as_ref() != Some(&take) {
                    src.push(Interval { start: &s.start + &take, end: s.end.clone() });
                }
                if ld.as_ref() != Some(&take) {
                    dst.push(Interval { start: &d.start + &take, end: d.end.clone() });
                }
            }
        }
    }
    if !src.is_empty() || !dst.is_empty() {
        return Err(Error::Invalid("level sets have different measures".into()));
    }
    Ok(())
}

/// Measure-preserving `ω: supp(g) -> supp(f)` with `(1+eps)·(f∘ω) >= g` on `supp(g)`.
///
/// `f` and `g` must be nonnegative and equimeasurable. Level sets above the
/// common tail value are matched exactly, so `f∘ω = g` there; the remaining
/// (infinite) part of `supp(g)` goes onto `{f = tail}`.
pub fn build_transfer_map(f: &StepFunction, g: &StepFunction, eps: &Rat) -> Result<MPMap> {
    if !eps.is_positive() {
        return Err(Error::Invalid("eps must be positive".into()));
    }
    if !f.is_nonnegative() || !g.is_nonnegative() {
        return Err(Error::Precondition("transfer map needs nonnegative functions".into()));
    }
    if f.rearrange() != g.rearrange() {
        return Err(Error::Precondition("f and g are not equimeasurable".into()));
    }
    let tail = f.tail().clone();
    let mut values: Vec<Rat> = g.pieces().iter().map(|p| p.val.clone()).filter(|v| *v > tail).collect();
    values.sort();
    values.dedup();
    let mut out = Vec::new();
    for v in values.iter().rev() {
        match_cells(&level_cells(g, |x| x == v), &level_cells(f, |x| x == v), &mut out)?;
    }
    if tail.is_positive() {
        let low_g = level_cells(g, |x| x.is_positive() && *x <= tail);
        let at_f = level_cells(f, |x| *x == tail);
        match_cells(&low_g, &at_f, &mut out)?;
    }
    MPMap::new(out)
}

/// Postcondition of [`build_transfer_map`]: `ω` tiles `supp(g)`, lands in
/// `supp(f)`, and `(1+eps)·(f∘ω) >= g` on every cell.
pub fn verify_transfer_map(f: &StepFunction, g: &StepFunction, eps: &Rat, map: &MPMap) -> Result<()> {
    if map.source_set() != g.support() {
        return Err(Error::Invalid(format!("map sources {} do not tile supp(g) = {}", map.source_set(), g.support())));
    }
    if !map.target_set().difference(&f.support()).is_empty() {
        return Err(Error::Invalid("map targets leave supp(f)".into()));
    }
    let pulled = map.pullback(f).scale(&(Rat::from_integer(1.into()) + eps));
    let diff = pulled.sub(g);
    if diff.pieces().iter().any(|p| p.val.is_negative()) || diff.tail().is_negative() {
        return Err(Error::Invalid("(1+eps)·f∘ω < g somewhere".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    #[test]
    fn single_level_set_is_translated() {
        let f = StepFunction::indicator(int(1), int(2), int(2));
        let g = StepFunction::indicator(int(0), int(1), int(2));
        let m = build_transfer_map(&f, &g, &frac(1, 10)).unwrap();
        assert_eq!(m.pieces().len(), 1);
        assert_eq!(m.pieces()[0].source, Interval::new(int(0), int(1)));
        assert_eq!(m.pieces()[0].target, Interval::new(int(1), int(2)));
        assert_eq!(m.pullback(&f), g);
        verify_transfer_map(&f, &g, &frac(1, 10), &m).unwrap();
    }

    #[test]
    fn decreasing_function_gets_identity() {
        let f = StepFunction::from_parts(vec![(int(1), int(3)), (int(2), int(1))], int(0));
        let m = build_transfer_map(&f, &f, &frac(1, 2)).unwrap();
        assert_eq!(m, MPMap::identity(&f.support()));
    }

    #[test]
    fn positive_tail_maps_low_values_onto_tail() {
        let f = StepFunction::from_parts(vec![(int(1), frac(1, 2))], int(1));
        let g = StepFunction::constant(int(1));
        let m = build_transfer_map(&f, &g, &frac(1, 10)).unwrap();
        verify_transfer_map(&f, &g, &frac(1, 10), &m).unwrap();
        assert_eq!(m.image(&int(0)), Some(int(1)));
    }

    #[test]
    fn reversed_pullback() {
        let f = StepFunction::from_parts(vec![(int(1), int(1)), (int(1), int(2))], int(0));
        let m = MPMap::new(vec![MapPiece {
            source: Interval::new(int(0), int(2)),
            target: Interval::new(int(0), int(2)),
            reversed: true,
        }])
        .unwrap();
        assert_eq!(m.pullback(&f), f.rearrange());
        assert_eq!(m.image(&frac(1, 2)), Some(frac(3, 2)));
    }

    #[test]
    fn rejects_non_equimeasurable() {
        let f = StepFunction::indicator(int(0), int(1), int(1));
        let g = StepFunction::indicator(int(0), int(2), int(1));
        assert!(build_transfer_map(&f, &g, &int(1)).is_err());
    }
}
