use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finseq::FinSeq;
use crate::interval::{Interval, IntervalSet};
use crate::mpmap::MPMap;
use crate::rat::{self, Rat};
use crate::stepfn::{DilateDirection, StepFunction};

/// Operand of an operator: a function on `(0, ∞)` or a sequence on `ℤ⁺`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Operand {
    Step(StepFunction),
    Seq(FinSeq),
}

impl Operand {
    pub fn domain(&self) -> Domain {
        match self {
            Operand::Step(_) => Domain::Continuous,
            Operand::Seq(_) => Domain::Sequence,
        }
    }

    pub fn as_step(&self) -> Result<&StepFunction> {
        match self {
            Operand::Step(f) => Ok(f),
            Operand::Seq(_) => Err(Error::Carrier("expected a step function, got a sequence".into())),
        }
    }

    pub fn as_seq(&self) -> Result<&FinSeq> {
        match self {
            Operand::Seq(a) => Ok(a),
            Operand::Step(_) => Err(Error::Carrier("expected a sequence, got a step function".into())),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Step(h) => write!(f, "{h}"),
            Operand::Seq(a) => write!(f, "{a}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Continuous,
    Sequence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplier {
    Step(StepFunction),
    Seq(FinSeq),
}

/// Weighted affine transfer `x ↦ w · x(φ(t))` on `output`, where `φ` maps
/// `output` onto the source interval starting at `source` with slope `slope`
/// (orientation flipped when `reversed`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferPiece {
    pub output: Interval,
    #[serde(with = "rat::serde_str")]
    pub source: Rat,
    #[serde(with = "rat::serde_str")]
    pub slope: Rat,
    #[serde(with = "rat::serde_str")]
    pub weight: Rat,
    #[serde(default)]
    pub reversed: bool,
}

impl TransferPiece {
    pub fn new(output: Interval, source: Rat, slope: Rat, weight: Rat) -> Self {
        TransferPiece { output, source, slope, weight, reversed: false }
    }

    /// `φ(output)`.
    pub fn source_interval(&self) -> Interval {
        match self.output.length() {
            Some(len) => Interval::new(self.source.clone(), &self.source + &self.slope * len),
            None => Interval::unbounded(self.source.clone()),
        }
    }

    /// `φ^{-1}(iv ∩ φ(output))`, or `None` when empty.
    pub fn preimage(&self, iv: &Interval) -> Option<Interval> {
        let hit = self.source_interval().intersect(iv)?;
        let back = |y: &Rat| (y - &self.source) / &self.slope;
        if self.reversed {
            let end = self.output.end.as_ref().expect("reversed pieces are finite");
            let hi = end - back(&hit.start);
            let lo = end - back(hit.end.as_ref().expect("finite"));
            Some(Interval::new(lo, hi))
        } else {
            let lo = &self.output.start + back(&hit.start);
            Some(match &hit.end {
                Some(e) => Interval::new(lo, &self.output.start + back(e)),
                None => Interval::unbounded(lo),
            })
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.slope.is_positive() {
            return Err(Error::Invalid("transfer slope must be positive".into()));
        }
        if self.output.is_empty() || self.output.start.is_negative() || self.source.is_negative() {
            return Err(Error::Invalid(format!("bad transfer piece on {}", self.output)));
        }
        if self.reversed && !self.output.is_finite() {
            return Err(Error::Invalid("reversed transfer pieces must be finite".into()));
        }
        Ok(())
    }
}

/// Row functional `x ↦ Σ coeffs[i] · x[support[i]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub support: Vec<usize>,
    #[serde(with = "rat::serde_vec")]
    pub coeffs: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Carrier {
    Set(IntervalSet),
    Indices(Vec<usize>),
}

impl Carrier {
    pub fn is_disjoint(&self, other: &Carrier) -> Result<bool> {
        match (self, other) {
            (Carrier::Set(a), Carrier::Set(b)) => Ok(a.is_disjoint(b)),
            (Carrier::Indices(a), Carrier::Indices(b)) => Ok(a.iter().all(|k| !b.contains(k))),
            _ => Err(Error::Carrier("mixed carrier kinds in one direct sum".into())),
        }
    }
}

/// One summand of a direct sum, with declared input and output carriers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub input: Carrier,
    pub output: Carrier,
    pub op: OperatorExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorExpr {
    /// Pointwise multiplication `M_h`.
    Mult(Multiplier),
    /// `x ↦ (x∘ω)·χ_sources` for a measure-preserving `ω`.
    Subst(MPMap),
    Dilate {
        n: u64,
        direction: DilateDirection,
    },
    Transfer(Vec<TransferPiece>),
    /// Row `n` of the output is the `n`-th functional.
    RowFunctional(Vec<Row>),
    DirectSum(Vec<Block>),
    /// `left ∘ right`.
    Compose(Box<OperatorExpr>, Box<OperatorExpr>),
    Scale {
        #[serde(with = "rat::serde_str")]
        c: Rat,
        op: Box<OperatorExpr>,
    },
    /// `E ∘ inner ∘ i`: embed a sequence as `a_n` on `[n, n+1)`, apply the
    /// continuous `inner`, average back over the unit cells.
    Discretize(Box<OperatorExpr>),
}

impl OperatorExpr {
    /// The identity on `(0, ∞)`, as `M_1`.
    pub fn identity() -> OperatorExpr {
        OperatorExpr::mult(StepFunction::constant(rat::one()))
    }

    /// The identity on indices `0..len`, as unit rows.
    pub fn seq_identity(len: usize) -> OperatorExpr {
        OperatorExpr::RowFunctional((0..len).map(|k| Row { support: vec![k], coeffs: vec![rat::one()] }).collect())
    }

    pub fn mult(h: StepFunction) -> OperatorExpr {
        OperatorExpr::Mult(Multiplier::Step(h))
    }

    pub fn compose(left: OperatorExpr, right: OperatorExpr) -> OperatorExpr {
        OperatorExpr::Compose(Box::new(left), Box::new(right))
    }

    pub fn scale(c: Rat, op: OperatorExpr) -> OperatorExpr {
        OperatorExpr::Scale { c, op: Box::new(op) }
    }

    /// Domain of inputs and outputs (all nodes map a domain to itself).
    pub fn domain(&self) -> Result<Domain> {
        match self {
            OperatorExpr::Mult(Multiplier::Step(_))
            | OperatorExpr::Subst(_)
            | OperatorExpr::Dilate { .. }
            | OperatorExpr::Transfer(_) => Ok(Domain::Continuous),
            OperatorExpr::Mult(Multiplier::Seq(_)) | OperatorExpr::RowFunctional(_) => Ok(Domain::Sequence),
            OperatorExpr::Discretize(inner) => match inner.domain()? {
                Domain::Continuous => Ok(Domain::Sequence),
                Domain::Sequence => Err(Error::Carrier("discretize needs a continuous inner operator".into())),
            },
            OperatorExpr::Scale { op, .. } => op.domain(),
            OperatorExpr::Compose(l, r) => {
                let (dl, dr) = (l.domain()?, r.domain()?);
                if dl != dr {
                    return Err(Error::Carrier("composition of operators on different domains".into()));
                }
                Ok(dl)
            }
            OperatorExpr::DirectSum(blocks) => {
                let mut doms = blocks.iter().map(|b| b.op.domain());
                let first = doms.next().unwrap_or(Ok(Domain::Continuous))?;
                for d in doms {
                    if d? != first {
                        return Err(Error::Carrier("direct sum of operators on different domains".into()));
                    }
                }
                Ok(first)
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self {
            OperatorExpr::DirectSum(blocks) => blocks.iter().map(|b| b.op.size()).sum(),
            OperatorExpr::Compose(l, r) => l.size() + r.size(),
            OperatorExpr::Scale { op, .. } | OperatorExpr::Discretize(op) => op.size(),
            _ => 0,
        }
    }

    pub(crate) fn validate_leaf(&self) -> Result<()> {
        match self {
            OperatorExpr::Transfer(pieces) => pieces.iter().try_for_each(TransferPiece::validate),
            OperatorExpr::RowFunctional(rows) => {
                for (n, row) in rows.iter().enumerate() {
                    if row.support.len() != row.coeffs.len() {
                        return Err(Error::Invalid(format!("row {n}: support and coefficients differ in length")));
                    }
                    let mut s = row.support.clone();
                    s.sort_unstable();
                    s.dedup();
                    if s.len() != row.support.len() {
                        return Err(Error::Invalid(format!("row {n}: repeated support index")));
                    }
                }
                Ok(())
            }
            OperatorExpr::Dilate { n, .. } if *n == 0 => Err(Error::Invalid("dilation factor must be positive".into())),
            _ => Ok(()),
        }
    }
}
