//! Operator norms on `L_p` / `ℓ_p` for `p ∈ {0} ∪ (0, ∞) ∪ {∞}`.
//!
//! For a weighted composition `x ↦ w·(x∘φ)` with pieces of slope `s_i`,
//! `‖T‖_p^p = ess sup_y Σ_{i : y ∈ φ(O_i)} |w_i|^p / s_i` (with `|w|^0 = 1`
//! for `w ≠ 0`), and `‖T‖_∞ = max |w_i|`. Both are evaluated exactly. Sparse
//! matrices are exact for `p ∈ {0} ∪ (0, 1] ∪ {∞}` and whenever rows or
//! columns carry a single entry; otherwise a certified bracket is returned.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::exact::{self, Enclosure};
use crate::rat::{self, Rat};
use crate::stepfn::NormIndex;

use super::expr::OperatorExpr;
use super::normal::{compile, Normal, SeqMatrix, TransferForm};

/// Norm of one operator at one index.
///
/// `powered` brackets `‖T‖^p` (`‖T‖` itself for `p ∈ {0, ∞}`); `value`
/// brackets `‖T‖`. When `exact` is false the brackets are a certified
/// lower bound and upper bound rather than a tight enclosure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormEntry {
    pub p: NormIndex,
    pub powered: Enclosure,
    pub value: Enclosure,
    pub exact: bool,
    /// Per-block values when the operator is a direct sum.
    pub blocks: Vec<Enclosure>,
}

impl NormEntry {
    fn from_powered(p: &NormIndex, powered: Enclosure, exact: bool) -> Result<Self> {
        let value = match p {
            NormIndex::Finite(p) => powered.pow(&p.recip())?,
            _ => powered.clone(),
        };
        Ok(NormEntry { p: p.clone(), powered, value, exact, blocks: Vec::new() })
    }

    pub fn upper(&self) -> &Rat {
        &self.value.hi
    }
}

impl Serialize for NormEntry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("NormEntry", 6)?;
        st.serialize_field("p", &self.p.to_string())?;
        st.serialize_field("exact", &self.exact)?;
        st.serialize_field("lo", &rat::format(&self.value.lo))?;
        st.serialize_field("hi", &rat::format(&self.value.hi))?;
        st.serialize_field("approx", &self.value.midpoint_f64())?;
        let blocks: Vec<f64> = self.blocks.iter().map(Enclosure::midpoint_f64).collect();
        st.serialize_field("blocks", &blocks)?;
        st.end()
    }
}

/// Norms at several indices.
#[derive(Clone, Debug, Default, Serialize)]
pub struct NormReport {
    pub entries: Vec<NormEntry>,
}

impl NormReport {
    pub fn get(&self, p: &NormIndex) -> Option<&NormEntry> {
        self.entries.iter().find(|e| &e.p == p)
    }
}

fn contribution(weight: &Rat, slope: &Rat, p: &NormIndex) -> Result<Enclosure> {
    match p {
        NormIndex::Zero => Ok(Enclosure::exact(slope.recip())),
        NormIndex::Finite(p) => Ok(exact::pow_enclosure(&weight.abs(), p)?.scale(&slope.recip())),
        NormIndex::Infinity => unreachable!("handled separately"),
    }
}

/// `ess sup_y Σ c_i χ_{φ(O_i)}(y)` by a sweep over the source endpoints.
fn density_sup(t: &TransferForm, p: &NormIndex) -> Result<Enclosure> {
    let mut events: Vec<(Rat, usize, bool)> = Vec::new();
    let mut contrib = Vec::with_capacity(t.pieces().len());
    for (i, piece) in t.pieces().iter().enumerate() {
        let src = piece.source_interval();
        contrib.push(contribution(&piece.weight, &piece.slope, p)?);
        events.push((src.start.clone(), i, true));
        if let Some(e) = src.end {
            events.push((e, i, false));
        }
    }
    // closings before openings at the same point
    events.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.cmp(&b.2)));
    let mut active: BTreeMap<usize, ()> = BTreeMap::new();
    let mut best = Enclosure::zero();
    let mut k = 0;
    while k < events.len() {
        let x = events[k].0.clone();
        while k < events.len() && events[k].0 == x {
            let (_, i, open) = &events[k];
            if *open {
                active.insert(*i, ());
            } else {
                active.remove(i);
            }
            k += 1;
        }
        if !active.is_empty() {
            let sum = active.keys().fold(Enclosure::zero(), |acc, i| acc.add(&contrib[*i]));
            best = best.max(&sum);
        }
    }
    Ok(best)
}

pub fn transfer_norm(t: &TransferForm, p: &NormIndex) -> Result<NormEntry> {
    match p {
        NormIndex::Infinity => {
            let m = t.pieces().iter().map(|x| x.weight.abs()).max().unwrap_or_else(Rat::zero);
            NormEntry::from_powered(p, Enclosure::exact(m), true)
        }
        _ => NormEntry::from_powered(p, density_sup(t, p)?, true),
    }
}

fn pmass(values: impl Iterator<Item = Rat>, p: &Rat) -> Result<Enclosure> {
    let mut acc = Enclosure::zero();
    for v in values {
        acc = acc.add(&exact::pow_enclosure(&v.abs(), p)?);
    }
    Ok(acc)
}

fn max_enc(items: impl Iterator<Item = Result<Enclosure>>) -> Result<Enclosure> {
    let mut best = Enclosure::zero();
    for e in items {
        best = best.max(&e?);
    }
    Ok(best)
}

pub fn matrix_norm(m: &SeqMatrix, p: &NormIndex) -> Result<NormEntry> {
    let cols = m.columns();
    let row_sum = |r: &BTreeMap<usize, Rat>| r.values().map(|c| c.abs()).sum::<Rat>();
    let l1 = cols.values().map(row_sum).max().unwrap_or_else(Rat::zero);
    let linf = m.rows().values().map(row_sum).max().unwrap_or_else(Rat::zero);
    let max_col_count = cols.values().map(|c| c.len()).max().unwrap_or(0);
    match p {
        NormIndex::Infinity => NormEntry::from_powered(p, Enclosure::exact(linf), true),
        NormIndex::Zero => NormEntry::from_powered(p, Enclosure::exact(rat::int(max_col_count as i64)), true),
        NormIndex::Finite(q) => {
            // ‖T e_k‖_p^p: exact for p <= 1 and for single-entry rows
            let col_mass = max_enc(cols.values().map(|c| pmass(c.values().cloned(), q)))?;
            let single_rows = m.rows().values().all(|r| r.len() <= 1);
            if *q <= rat::one() || single_rows {
                return NormEntry::from_powered(p, col_mass, true);
            }
            // Hölder per row: ‖φ_n‖_{p'}^p = (Σ|c|^{p'})^{p-1}
            let conj = q / (q - rat::one());
            let dual = max_enc(m.rows().values().map(|r| pmass(r.values().cloned(), &conj)?.pow(&(q - rat::one()))))?;
            if max_col_count <= 1 {
                return NormEntry::from_powered(p, dual, true);
            }
            let row_bound = dual.scale(&rat::int(max_col_count as i64));
            let interp = Enclosure::exact(l1).mul(&Enclosure::exact(linf).pow(&(q - rat::one()))?);
            let upper = if row_bound.hi <= interp.hi { row_bound } else { interp };
            NormEntry::from_powered(p, Enclosure { lo: col_mass.lo, hi: upper.hi }, false)
        }
    }
}

pub fn normal_norm(n: &Normal, p: &NormIndex) -> Result<NormEntry> {
    match n {
        Normal::Transfer(t) => transfer_norm(t, p),
        Normal::Matrix(m) => matrix_norm(m, p),
    }
}

fn powered_of(value_hi: &Rat, p: &NormIndex) -> Result<Rat> {
    match p {
        NormIndex::Finite(q) => Ok(exact::pow_enclosure(value_hi, q)?.hi),
        _ => Ok(value_hi.clone()),
    }
}

/// Certified upper bound on `‖T‖` from the tree structure, `None` if unbounded.
fn structural_upper(expr: &OperatorExpr, p: &NormIndex) -> Result<Option<Rat>> {
    Ok(match expr {
        OperatorExpr::DirectSum(blocks) => {
            let mut best = Rat::zero();
            for b in blocks {
                match structural_upper(&b.op, p)? {
                    Some(u) => best = rat::max(&best, &u),
                    None => return Ok(None),
                }
            }
            Some(best)
        }
        OperatorExpr::Compose(l, r) => match (structural_upper(l, p)?, structural_upper(r, p)?) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        },
        OperatorExpr::Scale { c, op } => structural_upper(op, p)?.map(|u| match p {
            NormIndex::Zero if !c.is_zero() => u,
            _ => u * c.abs(),
        }),
        // averaging and embedding are contractions on L_p for p >= 1 only
        OperatorExpr::Discretize(inner) => match p {
            NormIndex::Infinity => structural_upper(inner, p)?,
            NormIndex::Finite(q) if *q >= rat::one() => structural_upper(inner, p)?,
            _ => None,
        },
        leaf => Some(normal_norm(&compile(leaf)?, p)?.value.hi),
    })
}

/// Norm of `expr` at `p`, exact where possible, with per-block breakdown for direct sums.
pub fn op_norm(expr: &OperatorExpr, p: &NormIndex) -> Result<NormEntry> {
    let mut entry = normal_norm(&compile(expr)?, p)?;
    if !entry.exact {
        if let Some(u) = structural_upper(expr, p)? {
            if u < entry.value.hi {
                entry.value.hi = u.clone();
                entry.powered.hi = powered_of(&u, p)?;
            }
        }
    }
    if let OperatorExpr::DirectSum(blocks) = expr {
        for b in blocks {
            entry.blocks.push(op_norm(&b.op, p)?.value);
        }
    }
    Ok(entry)
}

pub fn op_norms(expr: &OperatorExpr, ps: &[NormIndex]) -> Result<NormReport> {
    Ok(NormReport { entries: ps.iter().map(|p| op_norm(expr, p)).collect::<Result<_>>()? })
}
