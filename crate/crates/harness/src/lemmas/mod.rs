//! Built-in lemmas.

mod basic;
mod interp;
mod partition;
mod seq;
mod synth;

use majorn_core::generate::{gen_pair_with, RETRY_BUDGET};
use majorn_core::operators::SynthKind;
use majorn_core::rat::{self, Rat};
use majorn_core::{check_order, Error, FinSeq, OrderKind, Result, StepFunction};
use num_traits::Zero;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use interp::spike_plateau_family;
pub use synth::{APPLY_EXACT, APPLY_INEXACT, BOUNDS_HOLD, BOUNDS_VIOLATED};

use crate::lemma::LemmaRegistry;

pub fn register_all(r: &mut LemmaRegistry) {
    r.register(basic::Rearrange);
    r.register(basic::CheckOrder);
    r.register(basic::TransferMap);
    r.register(partition::Pairs);
    r.register(partition::Head);
    r.register(partition::Tail);
    r.register(partition::Seq);
    for kind in SynthKind::ALL {
        r.register(synth::Synth(kind));
    }
    r.alias("first-operator", "synth-head-eq");
    r.alias("second-operator", "synth-tail-eq");
    r.alias("third-operator", "synth-head-weak");
    r.alias("fourth-operator", "synth-tail-weak");
    r.register(synth::LpContraction);
    r.register(interp::Decompose);
    r.register(interp::KL0Lq);
    r.register(interp::KL1Linf);
    r.register(interp::MonotoneProbe);
    r.register(seq::CvComparison);
    r.register(seq::BoydRecovery);
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct PairData {
    pub f: StepFunction,
    pub g: StepFunction,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct SeqPairData {
    pub a: FinSeq,
    pub b: FinSeq,
}

pub(crate) fn exps(v: &[(i64, i64)]) -> Vec<Rat> {
    v.iter().map(|&(a, b)| rat::frac(a, b)).collect()
}

/// Ordered pair from the core generator, redrawn until both tails vanish.
pub(crate) fn finite_pair(rng: &mut ChaCha8Rng, kind: &OrderKind, size: usize) -> Result<(StepFunction, StepFunction)> {
    for _ in 0..RETRY_BUDGET {
        let (f, g) = gen_pair_with(rng, kind, size)?;
        if f.tail().is_zero() && g.tail().is_zero() {
            return Ok((f, g));
        }
    }
    Err(Error::Oracle(format!("no {kind} pair with zero tails within {RETRY_BUDGET} attempts")))
}

/// Rejects instances where `g` is not below `f`.
pub(crate) fn require_order(f: &StepFunction, g: &StepFunction, kind: &OrderKind) -> Result<()> {
    let cert = check_order(f, g, kind)?;
    if !cert.holds {
        return Err(Error::Precondition(format!(
            "g is not {kind}-majorized by f (witness t = {})",
            cert.witness.as_ref().map(rat::format).unwrap_or_default()
        )));
    }
    Ok(())
}
