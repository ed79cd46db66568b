//! Compiled forms: every continuous expression reduces to a weighted
//! composition `x ↦ w·(x∘φ)` with piecewise-affine `φ`, every sequence
//! expression to a sparse matrix.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::finseq::FinSeq;
use crate::interval::{Interval, IntervalSet};
use crate::mpmap::MPMap;
use crate::rat::{self, Rat};
use crate::stepfn::{DilateDirection, StepFunction};

use super::expr::{Block, Carrier, Multiplier, OperatorExpr, Row, TransferPiece};

impl TransferPiece {
    /// `φ(sub)` for a subinterval `sub` of `output`.
    pub(crate) fn image(&self, sub: &Interval) -> Interval {
        let fwd = |t: &Rat| &self.source + &self.slope * (t - &self.output.start);
        if self.reversed {
            let end = self.output.end.as_ref().expect("reversed pieces are finite");
            let back = |t: &Rat| &self.source + &self.slope * (end - t);
            Interval::new(back(sub.end.as_ref().expect("finite")), back(&sub.start))
        } else {
            match &sub.end {
                Some(e) => Interval::new(fwd(&sub.start), fwd(e)),
                None => Interval::unbounded(fwd(&sub.start)),
            }
        }
    }
}

/// `x ↦ Σ_i w_i · x(φ_i(t)) χ_{O_i}(t)` with disjoint outputs `O_i`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransferForm {
    pieces: Vec<TransferPiece>,
}

impl TransferForm {
    pub fn new(pieces: Vec<TransferPiece>) -> Result<Self> {
        let mut pieces: Vec<TransferPiece> =
            pieces.into_iter().filter(|p| !p.weight.is_zero() && !p.output.is_empty()).collect();
        for p in &pieces {
            OperatorExpr::Transfer(vec![p.clone()]).validate_leaf()?;
        }
        pieces.sort_by(|a, b| a.output.start.cmp(&b.output.start));
        if !pieces.windows(2).all(|w| w[0].output.precedes(&w[1].output)) {
            return Err(Error::Invalid("transfer outputs overlap".into()));
        }
        Ok(TransferForm { pieces })
    }

    pub fn pieces(&self) -> &[TransferPiece] {
        &self.pieces
    }

    pub fn mult(h: &StepFunction) -> Self {
        TransferForm {
            pieces: h
                .cells()
                .into_iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(cell, v)| TransferPiece::new(cell.clone(), cell.start, rat::one(), v))
                .collect(),
        }
    }

    pub fn subst(m: &MPMap) -> Self {
        TransferForm {
            pieces: m
                .pieces()
                .iter()
                .map(|p| TransferPiece {
                    output: p.source.clone(),
                    source: p.target.start.clone(),
                    slope: rat::one(),
                    weight: rat::one(),
                    reversed: p.reversed,
                })
                .collect(),
        }
    }

    pub fn dilate(n: u64, direction: DilateDirection) -> Self {
        let n = Rat::from_integer(n.into());
        let slope = match direction {
            DilateDirection::Expand => n.recip(),
            DilateDirection::Contract => n,
        };
        TransferForm {
            pieces: vec![TransferPiece::new(Interval::unbounded(Rat::zero()), Rat::zero(), slope, rat::one())],
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return TransferForm::default();
        }
        let mut out = self.clone();
        for p in &mut out.pieces {
            p.weight *= c;
        }
        out
    }

    /// `self ∘ right`.
    pub fn compose(&self, right: &TransferForm) -> TransferForm {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            let src = p.source_interval();
            for q in &right.pieces {
                let Some(mid) = src.intersect(&q.output) else { continue };
                if mid.is_empty() {
                    continue;
                }
                let out = p.preimage(&mid).expect("nonempty intersection");
                let img = q.image(&mid);
                pieces.push(TransferPiece {
                    output: out,
                    source: img.start,
                    slope: &p.slope * &q.slope,
                    weight: &p.weight * &q.weight,
                    reversed: p.reversed != q.reversed,
                });
            }
        }
        pieces.sort_by(|a, b| a.output.start.cmp(&b.output.start));
        TransferForm { pieces }
    }

    /// Union of the source intervals: the set the operator reads from.
    pub fn input_carrier(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.pieces.iter().map(TransferPiece::source_interval).collect())
    }

    pub fn output_carrier(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.pieces.iter().map(|p| p.output.clone()).collect())
    }

    pub fn apply(&self, x: &StepFunction) -> StepFunction {
        let cells = x.cells();
        let mut segs: Vec<(Interval, Rat)> = Vec::new();
        for p in &self.pieces {
            let src = p.source_interval();
            for (cell, v) in &cells {
                if v.is_zero() {
                    continue;
                }
                if let Some(hit) = cell.intersect(&src) {
                    if !hit.is_empty() {
                        segs.push((p.preimage(&hit).expect("nonempty"), &p.weight * v));
                    }
                }
            }
        }
        assemble(segs)
    }
}

/// Step function from disjoint `(interval, value)` segments; gaps are zero.
pub(crate) fn assemble(mut segs: Vec<(Interval, Rat)>) -> StepFunction {
    segs.retain(|(iv, _)| !iv.is_empty());
    segs.sort_by(|a, b| a.0.start.cmp(&b.0.start));
    let mut pieces = Vec::with_capacity(segs.len() * 2);
    let mut cursor = Rat::zero();
    let mut tail = Rat::zero();
    for (iv, v) in segs {
        if iv.start > cursor {
            pieces.push((&iv.start - &cursor, Rat::zero()));
        }
        match iv.end {
            Some(e) => {
                pieces.push((&e - &iv.start, v));
                cursor = e;
            }
            None => {
                tail = v;
                break;
            }
        }
    }
    StepFunction::from_parts(pieces, tail)
}

/// Sparse matrix `row -> column -> coefficient`, zeros omitted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeqMatrix {
    rows: BTreeMap<usize, BTreeMap<usize, Rat>>,
}

impl SeqMatrix {
    pub fn from_rows(rows: &[Row]) -> Self {
        let mut m = SeqMatrix::default();
        for (n, row) in rows.iter().enumerate() {
            for (k, c) in row.support.iter().zip(&row.coeffs) {
                m.insert(n, *k, c.clone());
            }
        }
        m
    }

    pub fn diag(h: &FinSeq) -> Self {
        let mut m = SeqMatrix::default();
        for (k, c) in h.entries().iter().enumerate() {
            m.insert(k, k, c.clone());
        }
        m
    }

    pub(crate) fn insert_entry(&mut self, n: usize, k: usize, c: Rat) {
        self.insert(n, k, c)
    }

    fn insert(&mut self, n: usize, k: usize, c: Rat) {
        if !c.is_zero() {
            self.rows.entry(n).or_default().insert(k, c);
        }
    }

    pub fn rows(&self) -> &BTreeMap<usize, BTreeMap<usize, Rat>> {
        &self.rows
    }

    pub fn get(&self, n: usize, k: usize) -> Rat {
        self.rows.get(&n).and_then(|r| r.get(&k)).cloned().unwrap_or_else(Rat::zero)
    }

    /// `column -> row -> coefficient`.
    pub fn columns(&self) -> BTreeMap<usize, BTreeMap<usize, Rat>> {
        let mut cols: BTreeMap<usize, BTreeMap<usize, Rat>> = BTreeMap::new();
        for (n, row) in &self.rows {
            for (k, c) in row {
                cols.entry(*k).or_default().insert(*n, c.clone());
            }
        }
        cols
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut m = SeqMatrix::default();
        for (n, row) in &self.rows {
            for (k, v) in row {
                m.insert(*n, *k, v * c);
            }
        }
        m
    }

    /// `self ∘ right`.
    pub fn compose(&self, right: &SeqMatrix) -> SeqMatrix {
        let mut m = SeqMatrix::default();
        for (n, row) in &self.rows {
            let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
            for (j, c) in row {
                if let Some(rrow) = right.rows.get(j) {
                    for (k, d) in rrow {
                        *acc.entry(*k).or_insert_with(Rat::zero) += c * d;
                    }
                }
            }
            for (k, v) in acc {
                m.insert(*n, k, v);
            }
        }
        m
    }

    pub fn input_carrier(&self) -> Vec<usize> {
        self.columns().keys().copied().collect()
    }

    pub fn output_carrier(&self) -> Vec<usize> {
        self.rows.keys().copied().collect()
    }

    pub fn apply(&self, a: &FinSeq) -> FinSeq {
        let len = self.rows.keys().next_back().map_or(0, |n| n + 1);
        let mut out = vec![Rat::zero(); len];
        for (n, row) in &self.rows {
            out[*n] = row.iter().map(|(k, c)| c * a.get(*k)).sum();
        }
        FinSeq::new(out)
    }

    /// Rows `0..=last`, for serialization as a row functional.
    pub fn to_rows(&self) -> Vec<Row> {
        let len = self.rows.keys().next_back().map_or(0, |n| n + 1);
        (0..len)
            .map(|n| {
                let row = self.rows.get(&n);
                Row {
                    support: row.map(|r| r.keys().copied().collect()).unwrap_or_default(),
                    coeffs: row.map(|r| r.values().cloned().collect()).unwrap_or_default(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normal {
    Transfer(TransferForm),
    Matrix(SeqMatrix),
}

impl Normal {
    pub fn as_transfer(&self) -> Result<&TransferForm> {
        match self {
            Normal::Transfer(t) => Ok(t),
            Normal::Matrix(_) => Err(Error::Carrier("expected a continuous operator".into())),
        }
    }

    pub fn as_matrix(&self) -> Result<&SeqMatrix> {
        match self {
            Normal::Matrix(m) => Ok(m),
            Normal::Transfer(_) => Err(Error::Carrier("expected a sequence operator".into())),
        }
    }
}

fn check_carriers(blocks: &[Block], compiled: &[Normal]) -> Result<()> {
    for (k, (b, n)) in blocks.iter().zip(compiled).enumerate() {
        let ok = match (n, &b.input, &b.output) {
            (Normal::Transfer(t), Carrier::Set(i), Carrier::Set(o)) => {
                t.input_carrier().difference(i).is_empty() && t.output_carrier().difference(o).is_empty()
            }
            (Normal::Matrix(m), Carrier::Indices(i), Carrier::Indices(o)) => {
                m.input_carrier().iter().all(|k| i.contains(k)) && m.output_carrier().iter().all(|k| o.contains(k))
            }
            _ => return Err(Error::Carrier(format!("block {k}: carrier kind does not match the operator"))),
        };
        if !ok {
            return Err(Error::Carrier(format!("block {k}: operator acts outside its declared carriers")));
        }
    }
    for (k, a) in blocks.iter().enumerate() {
        for b in &blocks[k + 1..] {
            if !a.input.is_disjoint(&b.input)? || !a.output.is_disjoint(&b.output)? {
                return Err(Error::Carrier(format!("block {k}: carriers overlap another block")));
            }
        }
    }
    Ok(())
}

/// Matrix of `E ∘ T ∘ i` for a continuous `T` with bounded source set.
pub(crate) fn discretize(t: &TransferForm) -> Result<SeqMatrix> {
    let carrier = t.input_carrier();
    let Some(end) = carrier.sup() else {
        return Ok(SeqMatrix::default());
    };
    if carrier.intervals().last().is_some_and(|iv| !iv.is_finite()) {
        return Err(Error::Unsupported("discretizing an operator that reads an unbounded set".into()));
    }
    let cols = end.ceil().to_integer();
    let cols: usize = cols.try_into().map_err(|_| Error::Unsupported("discretization too large".into()))?;
    let mut m = SeqMatrix::default();
    for k in 0..cols {
        let e = StepFunction::indicator(rat::int(k as i64), rat::int(k as i64 + 1), rat::one());
        let col = FinSeq::average_from_step(&t.apply(&e))
            .ok_or_else(|| Error::Unsupported("discretized column does not vanish at infinity".into()))?;
        for (n, c) in col.entries().iter().enumerate() {
            m.insert(n, k, c.clone());
        }
    }
    Ok(m)
}

pub fn compile(expr: &OperatorExpr) -> Result<Normal> {
    expr.validate_leaf()?;
    Ok(match expr {
        OperatorExpr::Mult(Multiplier::Step(h)) => Normal::Transfer(TransferForm::mult(h)),
        OperatorExpr::Mult(Multiplier::Seq(h)) => Normal::Matrix(SeqMatrix::diag(h)),
        OperatorExpr::Subst(m) => Normal::Transfer(TransferForm::subst(m)),
        OperatorExpr::Dilate { n, direction } => Normal::Transfer(TransferForm::dilate(*n, *direction)),
        OperatorExpr::Transfer(pieces) => Normal::Transfer(TransferForm::new(pieces.clone())?),
        OperatorExpr::RowFunctional(rows) => Normal::Matrix(SeqMatrix::from_rows(rows)),
        OperatorExpr::Scale { c, op } => match compile(op)? {
            Normal::Transfer(t) => Normal::Transfer(t.scale(c)),
            Normal::Matrix(m) => Normal::Matrix(m.scale(c)),
        },
        OperatorExpr::Compose(l, r) => match (compile(l)?, compile(r)?) {
            (Normal::Transfer(a), Normal::Transfer(b)) => Normal::Transfer(a.compose(&b)),
            (Normal::Matrix(a), Normal::Matrix(b)) => Normal::Matrix(a.compose(&b)),
            _ => return Err(Error::Carrier("composition of operators on different domains".into())),
        },
        OperatorExpr::Discretize(inner) => Normal::Matrix(discretize(compile(inner)?.as_transfer()?)?),
        OperatorExpr::DirectSum(blocks) => {
            let compiled = blocks.iter().map(|b| compile(&b.op)).collect::<Result<Vec<_>>>()?;
            check_carriers(blocks, &compiled)?;
            if matches!(blocks.first().map(|b| &b.input), Some(Carrier::Indices(_))) {
                let mut m = SeqMatrix::default();
                for n in compiled {
                    for (r, row) in n.as_matrix()?.rows() {
                        for (k, c) in row {
                            m.insert(*r, *k, c.clone());
                        }
                    }
                }
                Normal::Matrix(m)
            } else {
                let mut pieces = Vec::new();
                for n in compiled {
                    pieces.extend(n.as_transfer()?.pieces().iter().cloned());
                }
                Normal::Transfer(TransferForm::new(pieces)?)
            }
        }
    })
}

/// Exact linear action of `expr` on `x`.
pub fn apply(expr: &OperatorExpr, x: &super::Operand) -> Result<super::Operand> {
    use super::Operand;
    match (compile(expr)?, x) {
        (Normal::Transfer(t), Operand::Step(f)) => Ok(Operand::Step(t.apply(f))),
        (Normal::Matrix(m), Operand::Seq(a)) => Ok(Operand::Seq(m.apply(a))),
        _ => Err(Error::Carrier("operand does not live on the operator's domain".into())),
    }
}
