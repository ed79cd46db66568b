//! Partition lemmas: reduce head/tail majorization to simple blocks.
//!
//! * [`partition_pairs`]: equal-mass head majorization as a disjoint family of
//!   interval pairs `(I_k, J_k)` on which both functions are constant.
//! * [`partition_head`] / [`partition_tail`]: weak majorization as equal-mass
//!   blocks `Δ_k` plus pointwise domination on the complement.
//! * [`partition_seq`]: the sequence analogue with overlap at most three.
//!
//! Each construction has an independent postcondition checker.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finseq::FinSeq;
use crate::interval::{Interval, IntervalSet};
use crate::majorization::{check_order, check_order_on_set, check_order_seq, OrderKind, OrderTag};
use crate::rat::{self, Rat};
use crate::stepfn::StepFunction;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalPair {
    #[serde(rename = "I")]
    pub i: Interval,
    #[serde(rename = "J")]
    pub j: Interval,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairPartition {
    pub pairs: Vec<IntervalPair>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaPartition {
    pub deltas: Vec<IntervalSet>,
}

impl DeltaPartition {
    pub fn union(&self) -> IntervalSet {
        self.deltas.iter().fold(IntervalSet::empty(), |acc, d| acc.union(d))
    }
}

/// `Δ_n` for every index `n` below the joint length.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqDeltaCover {
    pub sets: Vec<Vec<usize>>,
}

impl SeqDeltaCover {
    /// `k ↦ |{n : k ∈ Δ_n}|` for every covered `k`.
    pub fn overlaps(&self) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for set in &self.sets {
            for &k in set {
                *counts.entry(k).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Histogram `overlap count ↦ number of indices`.
    pub fn overlap_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for c in self.overlaps().values() {
            *hist.entry(*c).or_insert(0) += 1;
        }
        hist
    }
}

fn head_equal() -> OrderKind {
    OrderKind::new(OrderTag::HeadEqual, rat::one())
}

fn require_decreasing(f: &StepFunction, g: &StepFunction) -> Result<()> {
    if !f.is_decreasing_rearrangement() || !g.is_decreasing_rearrangement() {
        return Err(Error::Precondition("f and g must be nonnegative and non-increasing".into()));
    }
    Ok(())
}

fn require_order(f: &StepFunction, g: &StepFunction, tag: OrderTag) -> Result<()> {
    let cert = check_order(f, g, &OrderKind::new(tag, rat::one()))?;
    if !cert.holds {
        return Err(Error::Precondition(format!(
            "g is not {tag}-majorized by f (witness t = {})",
            cert.witness.as_ref().map(rat::format).unwrap_or_default()
        )));
    }
    Ok(())
}

/// Common refinement: cells `[x_i, x_{i+1})` with the values of `f` and `g`.
fn joint_cells(f: &StepFunction, g: &StepFunction) -> Vec<(Interval, Rat, Rat)> {
    let mut pts = f.breakpoints();
    pts.extend(g.breakpoints());
    pts.sort();
    pts.dedup();
    pts.windows(2).map(|w| (Interval::new(w[0].clone(), w[1].clone()), f.value_at(&w[0]), g.value_at(&w[0]))).collect()
}

/// Interval pairs for `g ≺_hd f` (equal masses), both decreasing step functions in `L_1`.
///
/// Left-to-right sweep: cells where `f > g` are queued as surplus; each later
/// cell with `g > f` consumes surplus in FIFO order, and every match carves
/// lengths so that `(f-g)·m(I) = (g-f)·m(J)`. Cells with `f = g > 0` become a
/// pair made of their two halves.
pub fn partition_pairs(f: &StepFunction, g: &StepFunction) -> Result<PairPartition> {
    require_decreasing(f, g)?;
    if !f.tail().is_zero() || !g.tail().is_zero() {
        return Err(Error::Precondition("pair partition needs f, g in L_1".into()));
    }
    let cert = check_order(f, g, &head_equal())?;
    if !cert.holds {
        return Err(Error::Precondition(format!(
            "g is not head-equal-majorized by f (witness t = {})",
            cert.witness.as_ref().map(rat::format).unwrap_or_default()
        )));
    }
    let mut pairs = Vec::new();
    // surplus queue: (start, remaining length, f - g)
    let mut queue: std::collections::VecDeque<(Rat, Rat, Rat)> = Default::default();
    for (cell, fv, gv) in joint_cells(f, g) {
        let len = cell.length().unwrap();
        if fv > gv {
            queue.push_back((cell.start.clone(), len, &fv - &gv));
        } else if gv > fv {
            let deficit = &gv - &fv;
            let mut j_start = cell.start.clone();
            let mut j_left = len;
            while j_left.is_positive() {
                let (i_start, i_len, surplus) =
                    queue.pop_front().ok_or_else(|| Error::Invalid("surplus exhausted before deficit".into()))?;
                // J length needed to absorb the whole remaining I
                let j_need = &i_len * &surplus / &deficit;
                let (i_take, j_take) = if j_need <= j_left {
                    (i_len.clone(), j_need)
                } else {
                    (&j_left * &deficit / &surplus, j_left.clone())
                };
                pairs.push(IntervalPair {
                    i: Interval::new(i_start.clone(), &i_start + &i_take),
                    j: Interval::new(j_start.clone(), &j_start + &j_take),
                });
                if i_take < i_len {
                    queue.push_front((&i_start + &i_take, &i_len - &i_take, surplus));
                }
                j_start += &j_take;
                j_left -= &j_take;
            }
        } else if fv.is_positive() {
            let mid = &cell.start + &len / rat::int(2);
            pairs.push(IntervalPair {
                i: Interval::new(cell.start.clone(), mid.clone()),
                j: Interval::new(mid, cell.end.clone().unwrap()),
            });
        }
    }
    if !queue.is_empty() {
        return Err(Error::Invalid("unmatched surplus after sweep".into()));
    }
    Ok(PairPartition { pairs })
}

fn constant_on(h: &StepFunction, iv: &Interval) -> bool {
    let end = iv.end.as_ref().expect("finite interval");
    h.window(&iv.start, end).iter().all(|(_, v)| *v == h.value_at(&iv.start))
}

/// Postconditions (i)–(iv) of the pair partition plus coverage of `{f ≠ g}`.
pub fn verify_pairs(f: &StepFunction, g: &StepFunction, part: &PairPartition) -> Result<()> {
    let mut all = Vec::new();
    for (k, p) in part.pairs.iter().enumerate() {
        if !p.i.is_finite() || !p.j.is_finite() || p.i.is_empty() || p.j.is_empty() {
            return Err(Error::Invalid(format!("pair {k}: intervals must be finite and nonempty")));
        }
        if !p.i.precedes(&p.j) {
            return Err(Error::Invalid(format!("pair {k}: I does not lie left of J")));
        }
        for h in [f, g] {
            if !constant_on(h, &p.i) || !constant_on(h, &p.j) {
                return Err(Error::Invalid(format!("pair {k}: functions not constant on I or J")));
            }
        }
        let block = IntervalSet::from_intervals(vec![p.i.clone(), p.j.clone()]);
        let cert = check_order_on_set(f, g, &block, &head_equal())?;
        if !cert.holds {
            return Err(Error::Invalid(format!("pair {k}: restricted head-equal order fails")));
        }
        let restricted = check_order(&f.restrict(&block), &g.restrict(&block), &head_equal())?;
        if !restricted.holds {
            return Err(Error::Invalid(format!("pair {k}: g|IuJ is not head-equal-majorized by f|IuJ")));
        }
        all.push(p.i.clone());
        all.push(p.j.clone());
    }
    all.sort_by(|a, b| a.start.cmp(&b.start));
    if !all.windows(2).all(|w| w[0].precedes(&w[1])) {
        return Err(Error::Invalid("pairs overlap".into()));
    }
    let covered = IntervalSet::from_intervals(all);
    let differ = f.sub(g).support();
    if !differ.difference(&covered).is_empty() {
        return Err(Error::Invalid("{f != g} is not covered by the pairs".into()));
    }
    Ok(())
}

/// Cells where `pred(f - g)` holds, as an interval set (tail included).
fn level_set(d: &StepFunction, pred: impl Fn(&Rat) -> bool) -> IntervalSet {
    IntervalSet::from_intervals(d.cells().into_iter().filter(|(_, v)| pred(v)).map(|(iv, _)| iv).collect())
}

/// Inverse of the non-decreasing map `u ↦ ∫_0^u h` (`h >= 0`): the smallest `u` reaching `level`.
fn first_reach(h: &StepFunction, level: &Rat) -> Option<Rat> {
    if !level.is_positive() {
        return Some(Rat::zero());
    }
    let mut acc = Rat::zero();
    for (cell, v) in h.cells() {
        if !v.is_positive() {
            continue;
        }
        match cell.length() {
            Some(len) => {
                let next = &acc + &v * &len;
                if next >= *level {
                    return Some(&cell.start + (level - &acc) / &v);
                }
                acc = next;
            }
            None => return Some(&cell.start + (level - &acc) / &v),
        }
    }
    None
}

/// Largest `u` with `∫_u^∞ h >= level` (`h >= 0` with zero tail); `None` when `level = 0`.
fn last_reach(h: &StepFunction, level: &Rat) -> Option<Rat> {
    if !level.is_positive() {
        return None;
    }
    let mut acc = Rat::zero();
    let cells = h.cells();
    for (cell, v) in cells.iter().rev() {
        let Some(len) = cell.length() else { continue };
        if !v.is_positive() {
            continue;
        }
        let next = &acc + v * &len;
        if next >= *level {
            return Some(cell.end.clone().unwrap() - (level - &acc) / v);
        }
        acc = next;
    }
    Some(Rat::zero())
}

/// Connected components `(a_k, b_k)` of `{g > f}`.
fn components(d: &StepFunction) -> Vec<Interval> {
    level_set(d, |v| v.is_negative()).intervals().to_vec()
}

/// The `H` map of the head construction: `H(t) = inf{u : P(u) = N(t)}` with
/// `P = ∫_0^· (f-g)_+` and `N = ∫_0^· (f-g)_-`.
pub fn head_h(f: &StepFunction, g: &StepFunction, t: &Rat) -> Result<Rat> {
    let d = f.sub(g);
    let pos = d.map_values(|v| if v.is_positive() { v.clone() } else { Rat::zero() });
    let neg = d.map_values(|v| if v.is_negative() { -v.clone() } else { Rat::zero() });
    let level = neg.prefix_integral(t);
    first_reach(&pos, &level).ok_or_else(|| Error::Precondition("negative part outweighs positive part".into()))
}

/// The `H` map of the tail construction: `H(t) = sup{u : ∫_u^∞ (f-g)_+ = ∫_t^∞ (f-g)_-}`;
/// `None` stands for `+∞`.
pub fn tail_h(f: &StepFunction, g: &StepFunction, t: &Rat) -> Result<Option<Rat>> {
    let d = f.sub(g);
    let pos = d.map_values(|v| if v.is_positive() { v.clone() } else { Rat::zero() });
    let neg = d.map_values(|v| if v.is_negative() { -v.clone() } else { Rat::zero() });
    let total_neg = neg.integral().ok_or_else(|| Error::Precondition("tails must vanish".into()))?;
    let level = total_neg - neg.prefix_integral(t);
    let total_pos = pos.integral().unwrap();
    if level > total_pos {
        return Err(Error::Precondition("negative tail part outweighs positive part".into()));
    }
    Ok(last_reach(&pos, &level))
}

/// Blocks `Δ_k` for `g ≺≺_hd f` (exponent 1; callers pre-apply powers).
pub fn partition_head(f: &StepFunction, g: &StepFunction) -> Result<DeltaPartition> {
    require_decreasing(f, g)?;
    require_order(f, g, OrderTag::HeadWeak)?;
    let d = f.sub(g);
    let f_ge_g = level_set(&d, |v| !v.is_negative());
    let mut deltas = Vec::new();
    for comp in components(&d) {
        let b = comp.end.clone().ok_or_else(|| Error::Precondition("g > f on an unbounded set".into()))?;
        let ha = head_h(f, g, &comp.start)?;
        let hb = head_h(f, g, &b)?;
        let mut delta = IntervalSet::single(comp.clone());
        if ha < hb {
            delta = delta.union(&f_ge_g.intersect_interval(&Interval::new(ha, hb)));
        }
        deltas.push(delta);
    }
    Ok(DeltaPartition { deltas })
}

/// Blocks `Δ_k` for `g ≺≺_tl f` (exponent 1). Where `H = +∞` the block is cut
/// at the end of the joint support.
pub fn partition_tail(f: &StepFunction, g: &StepFunction) -> Result<DeltaPartition> {
    require_decreasing(f, g)?;
    if !f.tail().is_zero() || !g.tail().is_zero() {
        return Err(Error::Precondition("tail partition needs f, g with zero tails".into()));
    }
    require_order(f, g, OrderTag::TailWeak)?;
    let d = f.sub(g);
    let f_ge_g = level_set(&d, |v| !v.is_negative());
    let joint_end = rat::max(&f.span(), &g.span());
    let mut deltas = Vec::new();
    for comp in components(&d) {
        let b = comp.end.clone().expect("zero tails give bounded components");
        let ha = tail_h(f, g, &comp.start)?.unwrap_or_else(|| joint_end.clone());
        let hb = tail_h(f, g, &b)?.unwrap_or_else(|| joint_end.clone());
        let mut delta = IntervalSet::single(comp.clone());
        if ha < hb {
            delta = delta.union(&f_ge_g.intersect_interval(&Interval::new(ha, hb)));
        }
        deltas.push(delta);
    }
    Ok(DeltaPartition { deltas })
}

fn verify_deltas(f: &StepFunction, g: &StepFunction, part: &DeltaPartition, head: bool) -> Result<()> {
    for (k, a) in part.deltas.iter().enumerate() {
        for b in &part.deltas[k + 1..] {
            if !a.is_disjoint(b) {
                return Err(Error::Invalid(format!("Δ_{k} overlaps another block")));
            }
        }
    }
    let union = part.union();
    let g_gt_f = level_set(&f.sub(g), |v| v.is_negative());
    if !g_gt_f.difference(&union).is_empty() {
        return Err(Error::Invalid("{g > f} is not covered by the blocks".into()));
    }
    for (k, delta) in part.deltas.iter().enumerate() {
        if delta.measure().is_none() {
            return Err(Error::Invalid(format!("Δ_{k} has infinite measure")));
        }
        let (fr, gr) = (f.restrict(delta), g.restrict(delta));
        // head: g|Δ ≺_hd f|Δ; tail: f|Δ ≺_hd g|Δ (equivalently g|Δ ≺_tl f|Δ)
        let cert = if head { check_order(&fr, &gr, &head_equal())? } else { check_order(&gr, &fr, &head_equal())? };
        if !cert.holds {
            return Err(Error::Invalid(format!("restricted equal-mass order fails on Δ_{k}")));
        }
        let tag = if head { OrderTag::HeadWeak } else { OrderTag::TailWeak };
        if !check_order_on_set(f, g, delta, &OrderKind::new(tag, rat::one()))?.holds {
            return Err(Error::Invalid(format!("positional restricted inequality fails on Δ_{k}")));
        }
    }
    Ok(())
}

pub fn verify_head_partition(f: &StepFunction, g: &StepFunction, part: &DeltaPartition) -> Result<()> {
    verify_deltas(f, g, part, true)
}

pub fn verify_tail_partition(f: &StepFunction, g: &StepFunction, part: &DeltaPartition) -> Result<()> {
    verify_deltas(f, g, part, false)
}

/// Sequence cover for `b ≺≺_tl a` (exponent 1), both nonnegative and non-increasing.
///
/// `Δ_n = {n}` when `b_n <= a_n`, else `{i_n, ..., i_{n+1}}` with
/// `i_n = sup{i : Σ_{k≥i} a_k >= Σ_{k≥n} b_k}`; when the right-hand side is
/// zero the supremum is capped at the last support index of `a`.
pub fn partition_seq(a: &FinSeq, b: &FinSeq) -> Result<SeqDeltaCover> {
    if !a.is_nonnegative() || !b.is_nonnegative() || !a.is_nonincreasing() || !b.is_nonincreasing() {
        return Err(Error::Precondition("a and b must be nonnegative and non-increasing".into()));
    }
    let cert = check_order_seq(a, b, &OrderKind::new(OrderTag::TailWeak, rat::one()))?;
    if !cert.holds {
        return Err(Error::Precondition("b is not tail-weak-majorized by a".into()));
    }
    let len = a.len().max(b.len());
    let last = a.len().saturating_sub(1);
    // suffix sums, with one trailing zero
    let suffix = |s: &FinSeq| -> Vec<Rat> {
        let mut out = vec![Rat::zero(); len + 2];
        for k in (0..len).rev() {
            out[k] = &out[k + 1] + s.get(k);
        }
        out
    };
    let sa = suffix(a);
    let sb = suffix(b);
    let i_of = |n: usize| -> usize {
        let target = &sb[n.min(len)];
        if target.is_zero() {
            return last;
        }
        (0..=len).rev().find(|&i| sa[i] >= *target).unwrap_or(0)
    };
    let sets =
        (0..len).map(|n| if b.get(n) > a.get(n) { (i_of(n)..=i_of(n + 1)).collect() } else { vec![n] }).collect();
    Ok(SeqDeltaCover { sets })
}

/// Overlap at most three, `Δ_n = {n}` off `I`, and `Σ_{k∈Δ_n} a_k >= b_n`.
pub fn verify_seq_cover(a: &FinSeq, b: &FinSeq, cover: &SeqDeltaCover) -> Result<()> {
    if let Some((k, c)) = cover.overlaps().into_iter().find(|(_, c)| *c > 3) {
        return Err(Error::Invalid(format!("index {k} lies in {c} sets")));
    }
    for (n, set) in cover.sets.iter().enumerate() {
        if b.get(n) <= a.get(n) && set != &vec![n] {
            return Err(Error::Invalid(format!("Δ_{n} should be {{{n}}}")));
        }
        let mass: Rat = set.iter().map(|&k| a.get(k)).sum();
        if mass < b.get(n) {
            return Err(Error::Invalid(format!("Σ over Δ_{n} is below b_{n}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;

    fn sf(pieces: &[(i64, i64)]) -> StepFunction {
        StepFunction::from_parts(pieces.iter().map(|&(l, v)| (int(l), int(v))).collect(), int(0))
    }

    #[test]
    fn pairs_example() {
        let f = sf(&[(1, 3), (1, 1)]);
        let g = sf(&[(2, 2)]);
        let part = partition_pairs(&f, &g).unwrap();
        assert_eq!(
            part.pairs,
            vec![IntervalPair { i: Interval::new(int(0), int(1)), j: Interval::new(int(1), int(2)) }]
        );
        verify_pairs(&f, &g, &part).unwrap();
    }

    #[test]
    fn pairs_identity_uses_halves() {
        let f = sf(&[(2, 3)]);
        let part = partition_pairs(&f, &f).unwrap();
        assert_eq!(part.pairs.len(), 1);
        verify_pairs(&f, &f, &part).unwrap();
    }

    #[test]
    fn head_partition_example() {
        let f = sf(&[(1, 2)]);
        let g = sf(&[(2, 1)]);
        assert_eq!(head_h(&f, &g, &int(1)).unwrap(), int(0));
        assert_eq!(head_h(&f, &g, &int(2)).unwrap(), int(1));
        let part = partition_head(&f, &g).unwrap();
        assert_eq!(part.deltas, vec![IntervalSet::single(Interval::new(int(0), int(2)))]);
        verify_head_partition(&f, &g, &part).unwrap();
    }

    #[test]
    fn head_partition_empty_when_dominated() {
        let f = sf(&[(2, 3)]);
        let g = sf(&[(1, 2)]);
        assert!(partition_head(&f, &g).unwrap().deltas.is_empty());
        assert!(partition_tail(&f, &g).unwrap().deltas.is_empty());
    }

    #[test]
    fn tail_partition_example() {
        let f = sf(&[(2, 1)]);
        let g = sf(&[(1, 2)]);
        let part = partition_tail(&f, &g).unwrap();
        verify_tail_partition(&f, &g, &part).unwrap();
        assert_eq!(part.deltas, vec![IntervalSet::single(Interval::new(int(0), int(2)))]);
        // H(t) >= t
        assert_eq!(tail_h(&f, &g, &int(0)).unwrap(), Some(int(1)));
    }

    #[test]
    fn seq_example() {
        let a = FinSeq::from_ints(&[2, 1, 1]);
        let b = FinSeq::from_ints(&[2, 2, 0]);
        let cover = partition_seq(&a, &b).unwrap();
        assert_eq!(cover.sets, vec![vec![0], vec![1, 2], vec![2]]);
        verify_seq_cover(&a, &b, &cover).unwrap();
        let same = partition_seq(&a, &a).unwrap();
        assert_eq!(same.sets, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn preconditions_reject() {
        let f = sf(&[(1, 2)]);
        let g = sf(&[(2, 1)]);
        assert!(partition_head(&g, &f).unwrap_err().is_precondition());
        assert!(partition_pairs(&g, &f).unwrap_err().is_precondition());
    }
}
