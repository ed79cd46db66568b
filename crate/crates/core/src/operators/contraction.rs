//! Sampling check that `(L_0, L_q)` bi-contractions contract `L_p`, `p < q`.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Enclosure;
use crate::rat::{self, Rat};
use crate::stepfn::{DilateDirection, NormIndex, StepFunction};

use super::expr::OperatorExpr;
use super::norm::op_norm;
use super::normal::compile;

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    #[serde(with = "rat::serde_str")]
    pub p: Rat,
    #[serde(with = "rat::serde_str")]
    pub q: Rat,
    pub samples: usize,
    /// Certified upper bound on `max ‖Tf‖_p / ‖f‖_p` over the samples.
    #[serde(with = "rat::serde_str")]
    pub max_ratio_upper: Rat,
    pub max_ratio: f64,
}

/// `(1/n)·σ_{1/n}∘T` with `n = ⌈max(‖T‖_0, ‖T‖_q)⌉`: the dilation divides the
/// `L_0` norm by `n` and the `L_q` norm by `n^{1/q}`, the scalar divides the
/// `L_q` norm by another `n`, so the result is a contraction on both.
pub fn scale_to_bicontraction(op: &OperatorExpr, q: &Rat) -> Result<OperatorExpr> {
    let n0 = op_norm(op, &NormIndex::Zero)?.value.hi;
    let nq = op_norm(op, &NormIndex::Finite(q.clone()))?.value.hi;
    let n = rat::max(&n0, &nq).ceil().max(Rat::one());
    let n_int = n.to_integer().to_u64().ok_or_else(|| Error::Unsupported("scaling factor too large".into()))?;
    Ok(OperatorExpr::scale(
        n.recip(),
        OperatorExpr::compose(OperatorExpr::Dilate { n: n_int, direction: DilateDirection::Contract }, op.clone()),
    ))
}

fn lp_mass(f: &StepFunction, p: &Rat) -> Result<Enclosure> {
    f.p_mass(p)?.finite().cloned().ok_or_else(|| Error::Precondition("sample is not in L_p".into()))
}

/// Verifies `‖Tf‖_p <= ‖f‖_p` on the samples for a `T` with `‖T‖_0 <= 1` and
/// `‖T‖_q <= 1`; returns the largest observed ratio.
pub fn lp_contraction_check(
    op: &OperatorExpr,
    p: &Rat,
    q: &Rat,
    samples: &[StepFunction],
) -> Result<ContractionReport> {
    if !(p.is_positive() && p < q) {
        return Err(Error::Precondition("need 0 < p < q".into()));
    }
    let n0 = op_norm(op, &NormIndex::Zero)?;
    let nq = op_norm(op, &NormIndex::Finite(q.clone()))?;
    if n0.value.hi > Rat::one() || nq.value.hi > Rat::one() {
        return Err(Error::Precondition(format!(
            "operator is not an (L_0, L_q) contraction: norms {} and {}",
            n0.value, nq.value
        )));
    }
    let t = compile(op)?;
    let t = t.as_transfer()?;
    let mut worst = Rat::zero();
    let mut counted = 0;
    for f in samples {
        let base = lp_mass(f, p)?;
        if base.lo.is_zero() {
            continue;
        }
        let image = lp_mass(&t.apply(f), p)?;
        let ratio_powered = &image.hi / &base.lo;
        let ratio = Enclosure::exact(ratio_powered).pow(&p.recip())?.hi;
        if ratio > worst {
            worst = ratio;
        }
        counted += 1;
    }
    Ok(ContractionReport {
        p: p.clone(),
        q: q.clone(),
        samples: counted,
        max_ratio: rat::to_f64(&worst),
        max_ratio_upper: worst,
    })
}
