//! Explicit operators `T` with `Tf = g` for majorized pairs, and their
//! postcondition checker.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::PowerProduct;
use crate::finseq::FinSeq;
use crate::interval::{Interval, IntervalSet};
use crate::majorization::{check_order, check_order_seq, OrderKind, OrderTag};
use crate::mpmap::MPMap;
use crate::partitions::{partition_head, partition_pairs, partition_seq, partition_tail, IntervalPair};
use crate::rat::{self, Rat};
use crate::stepfn::{NormIndex, StepFunction};

use super::expr::{Block, Carrier, Operand, OperatorExpr, TransferPiece};
use super::norm::{op_norm, NormEntry};
use super::normal::{apply, SeqMatrix};

fn require(holds: bool, what: impl FnOnce() -> String) -> Result<()> {
    if holds {
        Ok(())
    } else {
        Err(Error::Precondition(what()))
    }
}

fn require_order(f: &StepFunction, g: &StepFunction, tag: OrderTag, r: &Rat) -> Result<()> {
    require(f.is_decreasing_rearrangement() && g.is_decreasing_rearrangement(), || {
        "f and g must be nonnegative and non-increasing".into()
    })?;
    let cert = check_order(f, g, &OrderKind::new(tag, r.clone()))?;
    require(cert.holds, || format!("g^{} is not {tag}-majorized by f^{}", rat::format(r), rat::format(r)))
}

fn require_positive_exponent(r: &Rat) -> Result<()> {
    require(r.is_positive(), || format!("exponent must be positive, got {}", rat::format(r)))
}

fn pair_carrier(pair: &IntervalPair) -> Carrier {
    Carrier::Set(IntervalSet::from_intervals(vec![pair.i.clone(), pair.j.clone()]))
}

fn block(carrier: Carrier, op: OperatorExpr) -> Block {
    Block { input: carrier.clone(), output: carrier, op }
}

fn len(iv: &Interval) -> Rat {
    iv.length().expect("pair intervals are finite")
}

/// Head-equal synthesis: for `|g|^p ≺_hd |f|^p`, a direct sum over the pair
/// partition of `(f^p, g^p)`. On a pair `(I, J)` with `f^p|_J <= g^p|_J / 2`
/// the block is `(g_I/f_I)·x` on `I` plus `(g_J/f_I)·x∘l` on `J` with
/// `l: J → I` affine; otherwise it is `M_{g/f}`.
pub fn synth_head_equal(f: &StepFunction, g: &StepFunction, p: &Rat) -> Result<OperatorExpr> {
    require_positive_exponent(p)?;
    require_order(f, g, OrderTag::HeadEqual, p)?;
    if f == g {
        return Ok(OperatorExpr::identity());
    }
    let (fp, gp) = (f.pow(p)?, g.pow(p)?);
    let pairs = partition_pairs(&fp, &gp)?;
    let two = rat::int(2);
    let mut blocks = Vec::with_capacity(pairs.pairs.len());
    for pair in &pairs.pairs {
        let (i, j) = (&pair.i, &pair.j);
        let (fi, fj) = (f.value_at(&i.start), f.value_at(&j.start));
        let (gi, gj) = (g.value_at(&i.start), g.value_at(&j.start));
        let on_i = TransferPiece::new(i.clone(), i.start.clone(), rat::one(), &gi / &fi);
        let on_j = if &fp.value_at(&j.start) * &two <= gp.value_at(&j.start) {
            TransferPiece::new(j.clone(), i.start.clone(), len(i) / len(j), &gj / &fi)
        } else {
            TransferPiece::new(j.clone(), j.start.clone(), rat::one(), &gj / &fj)
        };
        blocks.push(block(pair_carrier(pair), OperatorExpr::Transfer(vec![on_i, on_j])));
    }
    Ok(OperatorExpr::DirectSum(blocks))
}

/// Tail-equal synthesis: for `g^q ≺_tl f^q`, a direct sum over the pair
/// partition of `(g^q, f^q)`. On a pair with `‖fχ_I‖_q <= ‖fχ_J‖_q` the block
/// is `(g_I/f_J)·x∘l` on `I` (`l: I → J` affine) plus `(g_J/f_J)·x` on `J`;
/// otherwise it is `M_{g/f}`.
pub fn synth_tail_equal(f: &StepFunction, g: &StepFunction, q: &Rat) -> Result<OperatorExpr> {
    require_positive_exponent(q)?;
    require_order(f, g, OrderTag::TailEqual, q)?;
    if f == g {
        return Ok(OperatorExpr::identity());
    }
    let (fq, gq) = (f.pow(q)?, g.pow(q)?);
    let pairs = partition_pairs(&gq, &fq)?;
    let mut blocks = Vec::with_capacity(pairs.pairs.len());
    for pair in &pairs.pairs {
        let (i, j) = (&pair.i, &pair.j);
        let (fi, fj) = (f.value_at(&i.start), f.value_at(&j.start));
        let (gi, gj) = (g.value_at(&i.start), g.value_at(&j.start));
        let on_j = TransferPiece::new(j.clone(), j.start.clone(), rat::one(), &gj / &fj);
        let on_i = if fq.value_at(&i.start) * len(i) <= fq.value_at(&j.start) * len(j) {
            TransferPiece::new(i.clone(), j.start.clone(), len(j) / len(i), &gi / &fj)
        } else {
            TransferPiece::new(i.clone(), i.start.clone(), rat::one(), &gi / &fi)
        };
        blocks.push(block(pair_carrier(pair), OperatorExpr::Transfer(vec![on_i, on_j])));
    }
    Ok(OperatorExpr::DirectSum(blocks))
}

/// `expand ∘ inner ∘ compress` for the gap-closing map of `delta`.
fn conjugate_onto(delta: &IntervalSet, inner: OperatorExpr) -> OperatorExpr {
    let pack = MPMap::packing(delta);
    OperatorExpr::compose(OperatorExpr::Subst(pack.inverse()), OperatorExpr::compose(inner, OperatorExpr::Subst(pack)))
}

fn weak_synthesis(
    f: &StepFunction,
    g: &StepFunction,
    deltas: Vec<IntervalSet>,
    equal: impl Fn(&StepFunction, &StepFunction) -> Result<OperatorExpr>,
) -> Result<OperatorExpr> {
    let covered = deltas.iter().fold(IntervalSet::empty(), |acc, d| acc.union(d));
    let rest = covered.complement();
    let ratio = g.restrict(&rest).div(&f.restrict(&rest))?;
    if deltas.is_empty() {
        return Ok(OperatorExpr::mult(ratio));
    }
    let mut blocks = vec![block(Carrier::Set(rest), OperatorExpr::mult(ratio))];
    for delta in deltas {
        let inner = equal(&f.compress(&delta), &g.compress(&delta))?;
        blocks.push(block(Carrier::Set(delta.clone()), conjugate_onto(&delta, inner)));
    }
    Ok(OperatorExpr::DirectSum(blocks))
}

/// Head-weak synthesis: `M_{g/f}` off the blocks of the head partition of
/// `(f^p, g^p)`, head-equal synthesis on each block.
pub fn synth_head_weak(f: &StepFunction, g: &StepFunction, p: &Rat) -> Result<OperatorExpr> {
    require_positive_exponent(p)?;
    require_order(f, g, OrderTag::HeadWeak, p)?;
    let part = partition_head(&f.pow(p)?, &g.pow(p)?)?;
    weak_synthesis(f, g, part.deltas, |fc, gc| synth_head_equal(fc, gc, p))
}

/// Tail-weak synthesis: `M_{g/f}` off the blocks of the tail partition of
/// `(f^q, g^q)`, tail-equal synthesis on each block.
pub fn synth_tail_weak(f: &StepFunction, g: &StepFunction, q: &Rat) -> Result<OperatorExpr> {
    require_positive_exponent(q)?;
    require_order(f, g, OrderTag::TailWeak, q)?;
    let part = partition_tail(&f.pow(q)?, &g.pow(q)?)?;
    weak_synthesis(f, g, part.deltas, |fc, gc| synth_tail_equal(fc, gc, q))
}

fn sign(r: &Rat) -> Rat {
    if r.is_negative() {
        -rat::one()
    } else {
        rat::one()
    }
}

/// `(|s|` sorted decreasingly, original index of each sorted slot`)`.
fn sorted_abs(s: &FinSeq) -> (FinSeq, Vec<usize>) {
    let perm = s.sorting_permutation();
    (FinSeq::new(perm.iter().map(|&k| s.get(k).abs()).collect()), perm)
}

fn require_seq_order(a: &FinSeq, b: &FinSeq, tag: OrderTag, p: &Rat) -> Result<()> {
    let cert = check_order_seq(a, b, &OrderKind::new(tag, p.clone()))?;
    require(cert.holds, || format!("|b|^{} is not {tag}-majorized by |a|^{}", rat::format(p), rat::format(p)))
}

/// Sequence tail synthesis for `|b|^p ≺≺_tl |a|^p`, `p >= 1`: row `n` is
/// supported on the cover set `Δ_n` of `(|a|^p, |b|^p)` with coefficients
/// `b_n a_k^{p-1} / Σ_{j∈Δ_n} a_j^p`.
pub fn synth_seq_tail(a: &FinSeq, b: &FinSeq, p: &Rat) -> Result<OperatorExpr> {
    require(*p >= rat::one(), || format!("sequence tail synthesis needs p >= 1, got {}", rat::format(p)))?;
    require_seq_order(a, b, OrderTag::TailWeak, p)?;
    let (alpha, perm_a) = sorted_abs(a);
    let (beta, perm_b) = sorted_abs(b);
    let (ap, bp) = (alpha.pow(p)?, beta.pow(p)?);
    let cover = partition_seq(&ap, &bp)?;
    let mut m = SeqMatrix::default();
    for (n, set) in cover.sets.iter().enumerate() {
        let bn = beta.get(n);
        if bn.is_zero() {
            continue;
        }
        let mass: Rat = set.iter().map(|&k| ap.get(k)).sum();
        let row_sign = sign(&b.get(perm_b[n]));
        for &k in set {
            let ak = alpha.get(k);
            if ak.is_zero() {
                continue;
            }
            let c = &bn * (ap.get(k) / &ak) / &mass;
            m.insert_entry(perm_b[n], perm_a[k], &row_sign * sign(&a.get(perm_a[k])) * c);
        }
    }
    Ok(OperatorExpr::RowFunctional(m.to_rows()))
}

/// Signed permutation rows: output `perm[k]` (or input, when `inverse`) gets slot `k`.
fn signed_permutation(s: &FinSeq, perm: &[usize], inverse: bool) -> Option<OperatorExpr> {
    let trivial = perm.iter().enumerate().all(|(k, &j)| k == j) && s.is_nonnegative();
    if trivial {
        return None;
    }
    let mut m = SeqMatrix::default();
    for (k, &j) in perm.iter().enumerate() {
        let v = s.get(j);
        let c = if v.is_zero() { rat::one() } else { sign(&v) };
        if inverse {
            m.insert_entry(k, j, c);
        } else {
            m.insert_entry(j, k, c);
        }
    }
    Some(OperatorExpr::RowFunctional(m.to_rows()))
}

/// Sequence head synthesis for `|b|^p ≺≺_hd |a|^p`: the decreasing
/// rearrangements are embedded as step functions on unit cells, the
/// continuous head-weak operator is built there, and the result is averaged
/// back onto the integer grid. Signs and orderings are restored by signed
/// permutations.
pub fn synth_seq_head(a: &FinSeq, b: &FinSeq, p: &Rat) -> Result<OperatorExpr> {
    require_positive_exponent(p)?;
    require_seq_order(a, b, OrderTag::HeadWeak, p)?;
    let (alpha, perm_a) = sorted_abs(a);
    let (beta, perm_b) = sorted_abs(b);
    let inner = synth_head_weak(&alpha.to_step(), &beta.to_step(), p)?;
    let mut op = OperatorExpr::Discretize(Box::new(inner));
    if let Some(pin) = signed_permutation(a, &perm_a, true) {
        op = OperatorExpr::compose(op, pin);
    }
    if let Some(pout) = signed_permutation(b, &perm_b, false) {
        op = OperatorExpr::compose(pout, op);
    }
    Ok(op)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SynthKind {
    #[serde(rename = "head-eq")]
    HeadEqual,
    #[serde(rename = "tail-eq")]
    TailEqual,
    #[serde(rename = "head-weak")]
    HeadWeak,
    #[serde(rename = "tail-weak")]
    TailWeak,
    #[serde(rename = "seq-tail")]
    SeqTail,
    #[serde(rename = "seq-head")]
    SeqHead,
}

impl SynthKind {
    pub const ALL: [SynthKind; 6] = [
        SynthKind::HeadEqual,
        SynthKind::TailEqual,
        SynthKind::HeadWeak,
        SynthKind::TailWeak,
        SynthKind::SeqTail,
        SynthKind::SeqHead,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SynthKind::HeadEqual => "head-eq",
            SynthKind::TailEqual => "tail-eq",
            SynthKind::HeadWeak => "head-weak",
            SynthKind::TailWeak => "tail-weak",
            SynthKind::SeqTail => "seq-tail",
            SynthKind::SeqHead => "seq-head",
        }
    }

    pub fn is_sequence(self) -> bool {
        matches!(self, SynthKind::SeqTail | SynthKind::SeqHead)
    }

    /// The majorization the inputs must satisfy (at exponent `r`).
    pub fn order_tag(self) -> OrderTag {
        match self {
            SynthKind::HeadEqual => OrderTag::HeadEqual,
            SynthKind::TailEqual => OrderTag::TailEqual,
            SynthKind::HeadWeak | SynthKind::SeqHead => OrderTag::HeadWeak,
            SynthKind::TailWeak | SynthKind::SeqTail => OrderTag::TailWeak,
        }
    }

    /// Norm bounds `(index, bound on ‖T‖, label, binding)`.
    pub fn bounds(self, r: &Rat) -> Vec<(NormIndex, PowerProduct, &'static str, bool)> {
        let inv = r.recip();
        let c = |k: i64| PowerProduct::constant(rat::int(k));
        let root = |base: i64| PowerProduct::one().times(rat::int(base), inv.clone());
        let two_root = |base: i64| c(2).times(rat::int(base), inv.clone());
        let lp = NormIndex::Finite(r.clone());
        match self {
            SynthKind::HeadEqual => vec![
                (lp.clone(), two_root(3), "statement", true),
                (NormIndex::Infinity, two_root(2), "statement", true),
                (lp, root(3), "step-1", false),
                (NormIndex::Infinity, root(2), "step-1", false),
            ],
            SynthKind::TailEqual => vec![
                (NormIndex::Zero, c(4), "statement", true),
                (lp.clone(), two_root(3), "statement", true),
                (NormIndex::Zero, c(2), "proof", false),
                (lp, root(3), "proof", false),
            ],
            SynthKind::HeadWeak => vec![
                (lp.clone(), two_root(9), "proof", true),
                (NormIndex::Infinity, two_root(4), "proof", true),
                (lp, two_root(3), "statement", false),
                (NormIndex::Infinity, two_root(2), "statement", false),
            ],
            SynthKind::TailWeak => vec![
                (NormIndex::Zero, c(4), "statement", true),
                (lp.clone(), two_root(3), "statement", true),
                (NormIndex::Zero, c(8), "per-block", false),
                (lp, two_root(9), "per-block", false),
            ],
            SynthKind::SeqTail => vec![(lp, root(3), "statement", true), (NormIndex::Zero, c(3), "statement", true)],
            SynthKind::SeqHead => {
                vec![(lp, root(8), "statement", true), (NormIndex::Infinity, root(2), "statement", true)]
            }
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SynthKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SynthKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown synthesis kind {s:?}")))
    }
}

pub fn synthesize(kind: SynthKind, f: &Operand, g: &Operand, r: &Rat) -> Result<OperatorExpr> {
    match kind {
        SynthKind::HeadEqual => synth_head_equal(f.as_step()?, g.as_step()?, r),
        SynthKind::TailEqual => synth_tail_equal(f.as_step()?, g.as_step()?, r),
        SynthKind::HeadWeak => synth_head_weak(f.as_step()?, g.as_step()?, r),
        SynthKind::TailWeak => synth_tail_weak(f.as_step()?, g.as_step()?, r),
        SynthKind::SeqTail => synth_seq_tail(f.as_seq()?, g.as_seq()?, r),
        SynthKind::SeqHead => synth_seq_head(f.as_seq()?, g.as_seq()?, r),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub label: &'static str,
    pub binding: bool,
    pub observed: NormEntry,
    #[serde(serialize_with = "ser_display")]
    pub bound: PowerProduct,
    pub bound_approx: f64,
    /// `None` when the enclosure of the observed norm straddles the bound.
    pub holds: Option<bool>,
}

fn ser_display<S: serde::Serializer>(v: &PowerProduct, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthCheck {
    pub kind: SynthKind,
    pub apply_exact: bool,
    pub checks: Vec<BoundCheck>,
}

impl SynthCheck {
    /// `Tf = g` and every binding bound certified.
    pub fn passed(&self) -> bool {
        self.apply_exact && self.checks.iter().filter(|c| c.binding).all(|c| c.holds == Some(true))
    }

    /// Observed `‖T‖` upper values per norm index, for reporting.
    pub fn observed(&self) -> Vec<(String, f64)> {
        let mut seen = Vec::new();
        for c in &self.checks {
            let key = c.observed.p.to_string();
            if !seen.iter().any(|(k, _)| *k == key) {
                seen.push((key, rat::to_f64(c.observed.upper())));
            }
        }
        seen
    }
}

/// Checks `Tf = g` exactly and compares the norms of `T` against the bounds of `kind`.
///
/// Finite-index bounds are compared on `p`-th powers, so that rational
/// powered norms are decided exactly.
pub fn verify_synthesis(kind: SynthKind, f: &Operand, g: &Operand, r: &Rat, op: &OperatorExpr) -> Result<SynthCheck> {
    let apply_exact = apply(op, f)? == *g;
    let mut checks = Vec::new();
    let mut cache: Vec<NormEntry> = Vec::new();
    for (p, bound, label, binding) in kind.bounds(r) {
        let observed = match cache.iter().find(|e| e.p == p) {
            Some(e) => e.clone(),
            None => {
                let e = op_norm(op, &p)?;
                cache.push(e.clone());
                e
            }
        };
        let holds = match &p {
            NormIndex::Finite(q) => bound.pow(q).ge_enclosure(&observed.powered),
            _ => bound.ge_enclosure(&observed.value),
        };
        let bound_approx = bound.to_f64();
        checks.push(BoundCheck { label, binding, observed, bound, bound_approx, holds });
    }
    Ok(SynthCheck { kind, apply_exact, checks })
}
