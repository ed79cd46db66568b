use majorn_core::generate::{gen_pair_with, gen_seq_pair_with, random_step};
use majorn_core::operators::{
    lp_contraction_check, scale_to_bicontraction, synth_tail_weak, synthesize, verify_synthesis, Operand, SynthKind,
};
use majorn_core::rat::{self, Rat};
use majorn_core::{check_order, check_order_seq, Error, OrderKind, OrderTag, Result, StepFunction};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{exps, finite_pair, require_order};
use crate::lemma::{from_data, to_data, Bound, Lemma, Outcome, Variant};

#[derive(Serialize, Deserialize)]
struct OperandPair {
    f: Operand,
    g: Operand,
}

fn norm_key(p: &impl std::fmt::Display) -> String {
    format!("norm {p}")
}

pub const APPLY_EXACT: &str = "T f = g";
pub const APPLY_INEXACT: &str = "T f != g";
pub const BOUNDS_HOLD: &str = "binding bounds hold";
pub const BOUNDS_VIOLATED: &str = "binding bound violated";

/// One of the explicit operator constructions: `T` with `Tf = g` and bounded norms.
pub struct Synth(pub SynthKind);

impl Lemma for Synth {
    fn tag(&self) -> &'static str {
        match self.0 {
            SynthKind::HeadEqual => "synth-head-eq",
            SynthKind::TailEqual => "synth-tail-eq",
            SynthKind::HeadWeak => "synth-head-weak",
            SynthKind::TailWeak => "synth-tail-weak",
            SynthKind::SeqTail => "synth-seq-tail",
            SynthKind::SeqHead => "synth-seq-head",
        }
    }

    fn summary(&self) -> &'static str {
        match self.0 {
            SynthKind::HeadEqual => "operator mapping f to g under equal-mass head majorization",
            SynthKind::TailEqual => "operator mapping f to g under equal-mass tail majorization",
            SynthKind::HeadWeak => "operator mapping f to g under weak head majorization",
            SynthKind::TailWeak => "operator mapping f to g under weak tail majorization",
            SynthKind::SeqTail => "sequence operator for weak tail majorization",
            SynthKind::SeqHead => "sequence operator for weak head majorization",
        }
    }

    fn default_exponents(&self) -> Vec<Rat> {
        if self.0.is_sequence() {
            exps(&[(1, 1), (2, 1)])
        } else {
            exps(&[(1, 2), (1, 1), (2, 1)])
        }
    }

    fn default_size(&self) -> usize {
        5
    }

    /// Binding bounds only; the tighter ones are tallied per instance.
    fn bounds(&self, variant: &Variant) -> Vec<Bound> {
        self.0
            .bounds(&variant.r)
            .into_iter()
            .filter(|b| b.3)
            .map(|(p, bound, label, _)| Bound::new(norm_key(&p), format!("{bound} ({label})"), bound.to_f64()))
            .collect()
    }

    fn generate(&self, rng: &mut ChaCha8Rng, variant: &Variant, size: usize) -> Result<Value> {
        let size = rng.gen_range(1..=size);
        let tag = self.0.order_tag();
        let (f, g) = if self.0.is_sequence() {
            let scrambled = rng.gen_bool(0.5);
            let (a, b) = gen_seq_pair_with(rng, tag, size, &variant.r, scrambled)?;
            (Operand::Seq(a), Operand::Seq(b))
        } else {
            let kind = OrderKind::new(tag, variant.r.clone());
            let (f, g) = if tag == OrderTag::TailWeak {
                finite_pair(rng, &kind, size)?
            } else {
                gen_pair_with(rng, &kind, size)?
            };
            (Operand::Step(f), Operand::Step(g))
        };
        to_data(&OperandPair { f, g })
    }

    fn check(&self, variant: &Variant, data: &Value) -> Result<Outcome> {
        let OperandPair { f, g } = from_data(data)?;
        let kind = OrderKind::new(self.0.order_tag(), variant.r.clone());
        let cert = match (&f, &g) {
            (Operand::Step(a), Operand::Step(b)) => check_order(a, b, &kind)?,
            (Operand::Seq(a), Operand::Seq(b)) => check_order_seq(a, b, &kind)?,
            _ => return Err(Error::Invalid("f and g live in different domains".into())),
        };
        if !cert.holds {
            return Err(Error::Precondition(format!(
                "g is not {kind}-majorized by f (witness {})",
                cert.witness.as_ref().map(rat::format).unwrap_or_default()
            )));
        }
        let op = synthesize(self.0, &f, &g, &variant.r)?;
        let sc = verify_synthesis(self.0, &f, &g, &variant.r, &op)?;
        let mut out = Outcome::new(true).observe("operator size", op.size() as f64);
        for c in &sc.checks {
            out = out.observe(norm_key(&c.observed.p), rat::to_f64(c.observed.upper()));
            if !c.binding {
                let verdict = match c.holds {
                    Some(true) => "holds",
                    Some(false) => "exceeded",
                    None => "undecided",
                };
                out = out.count(format!("{} bound on norm {}: {verdict}", c.label, c.observed.p));
            }
        }
        out = out.count(if sc.apply_exact { APPLY_EXACT } else { APPLY_INEXACT });
        let violated = sc.checks.iter().filter(|c| c.binding && c.holds != Some(true)).count();
        out = out.count(if violated == 0 { BOUNDS_HOLD } else { BOUNDS_VIOLATED });
        if !sc.apply_exact {
            out = out.fail("T f differs from g");
        }
        for c in sc.checks.iter().filter(|c| c.binding && c.holds != Some(true)) {
            out = out.fail(format!(
                "norm {} upper value {} vs {} bound {} ({:?})",
                c.observed.p,
                rat::to_f64(c.observed.upper()),
                c.label,
                c.bound,
                c.holds
            ));
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct ContractionData {
    f: StepFunction,
    g: StepFunction,
    samples: Vec<StepFunction>,
}

/// Functions tested against each synthesized bi-contraction.
pub const CONTRACTION_SAMPLES: usize = 100;

pub fn contraction_slack() -> Rat {
    rat::one() + rat::pow2(-30)
}

/// Rescaled weak-tail operators are `(L_0, L_q)` contractions and must then
/// contract `L_p` for `p = q/2`.
pub struct LpContraction;

impl LpContraction {
    fn p_of(q: &Rat) -> Rat {
        q / rat::int(2)
    }
}

impl Lemma for LpContraction {
    fn tag(&self) -> &'static str {
        "lp-contraction"
    }

    fn summary(&self) -> &'static str {
        "(L_0, L_q) bi-contractions contract L_p, p = q/2"
    }

    fn default_exponents(&self) -> Vec<Rat> {
        exps(&[(2, 1), (1, 1)])
    }

    fn default_size(&self) -> usize {
        4
    }

    fn variants(&self, exponents: &[Rat]) -> Result<Vec<Variant>> {
        Ok(exponents
            .iter()
            .map(|q| Variant {
                label: format!("p={} q={}", rat::format(&Self::p_of(q)), rat::format(q)),
                r: q.clone(),
                kind: None,
            })
            .collect())
    }

    fn bounds(&self, _variant: &Variant) -> Vec<Bound> {
        vec![Bound::new("max ratio", "1 + 2^-30", rat::to_f64(&contraction_slack()))]
    }

    fn generate(&self, rng: &mut ChaCha8Rng, variant: &Variant, size: usize) -> Result<Value> {
        let (f, g) = finite_pair(rng, &OrderKind::new(OrderTag::TailWeak, variant.r.clone()), size)?;
        let samples = (0..CONTRACTION_SAMPLES).map(|_| random_step(rng, 6, false)).collect();
        to_data(&ContractionData { f, g, samples })
    }

    fn check(&self, variant: &Variant, data: &Value) -> Result<Outcome> {
        let d: ContractionData = from_data(data)?;
        let q = &variant.r;
        require_order(&d.f, &d.g, &OrderKind::new(OrderTag::TailWeak, q.clone()))?;
        let t = scale_to_bicontraction(&synth_tail_weak(&d.f, &d.g, q)?, q)?;
        let rep = lp_contraction_check(&t, &Self::p_of(q), q, &d.samples)?;
        let out = Outcome::new(true).observe("max ratio", rep.max_ratio).count_n("samples", rep.samples as u64);
        Ok(if rep.max_ratio_upper <= contraction_slack() {
            out
        } else {
            out.fail(format!("‖Tf‖_p / ‖f‖_p reaches {}", rat::format(&rep.max_ratio_upper)))
        })
    }
}
