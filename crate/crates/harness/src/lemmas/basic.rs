use majorn_core::exact::pow_int;
use majorn_core::generate::{gen_pair_with, random_powered_step, random_step, shuffle_pieces};
use majorn_core::mpmap::{build_transfer_map, verify_transfer_map};
use majorn_core::rat::{self, Rat};
use majorn_core::{check_order, Error, OrderKind, OrderTag, Result, StepFunction};
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::exps;
use crate::lemma::{from_data, to_data, Lemma, Outcome, Variant};
use crate::numeric::{dense_order, rearrange_by_distribution};

#[derive(Serialize, Deserialize)]
struct Single {
    f: StepFunction,
}

pub struct Rearrange;

impl Lemma for Rearrange {
    fn tag(&self) -> &'static str {
        "rearrange"
    }

    fn summary(&self) -> &'static str {
        "decreasing rearrangement against the distribution-function construction"
    }

    fn default_size(&self) -> usize {
        16
    }

    fn generate(&self, rng: &mut ChaCha8Rng, _variant: &Variant, size: usize) -> Result<Value> {
        let h = random_step(rng, size, true);
        let pieces = h
            .pieces()
            .iter()
            .map(|p| (p.len.clone(), if rng.gen_bool(0.3) { -p.val.clone() } else { p.val.clone() }))
            .collect();
        let tail = if rng.gen_bool(0.5) { -h.tail().clone() } else { h.tail().clone() };
        to_data(&Single { f: StepFunction::from_parts(pieces, tail) })
    }

    fn check(&self, _variant: &Variant, data: &Value) -> Result<Outcome> {
        let Single { f } = from_data(data)?;
        let got = f.rearrange();
        let want = rearrange_by_distribution(&f);
        let out = Outcome::new(true).observe("pieces", got.pieces().len() as f64);
        Ok(if got == want {
            out
        } else {
            out.fail(format!("rearrange gave {got:?}, distribution function gives {want:?}"))
        })
    }
}

#[derive(Serialize, Deserialize)]
struct OrderData {
    f: StepFunction,
    g: StepFunction,
    source: String,
}

/// Sample points of the numeric reference.
pub const DENSE_POINTS: usize = 1000;

pub struct CheckOrder;

impl Lemma for CheckOrder {
    fn tag(&self) -> &'static str {
        "check-order"
    }

    fn summary(&self) -> &'static str {
        "exact order decision against dense-grid numeric evaluation"
    }

    fn default_exponents(&self) -> Vec<Rat> {
        exps(&[(1, 2), (1, 1), (2, 1)])
    }

    fn variants(&self, exponents: &[Rat]) -> Result<Vec<Variant>> {
        Ok(OrderTag::ALL.iter().flat_map(|t| exponents.iter().map(|r| Variant::with_kind(*t, r))).collect())
    }

    /// A third each: generated ordered pairs, the same with `g` scaled up, and
    /// independent random pairs.
    fn generate(&self, rng: &mut ChaCha8Rng, variant: &Variant, size: usize) -> Result<Value> {
        let tag = variant.tag()?;
        let kind = OrderKind::new(tag, variant.r.clone());
        let n = variant.r.denom().to_i64().ok_or_else(|| Error::Unsupported("exponent too large".into()))?;
        let (f, g, source) = match rng.gen_range(0..3) {
            0 => {
                let (f, g) = gen_pair_with(rng, &kind, size)?;
                (f, g, "ordered")
            }
            1 => {
                let (f, g) = gen_pair_with(rng, &kind, size)?;
                let c = pow_int(&rat::frac(9, 8), n);
                (f, g.scale(&c), "perturbed")
            }
            _ => {
                let tails = variant.r.is_integer() && !tag.is_equal();
                let draw = |rng: &mut ChaCha8Rng| {
                    if tails {
                        random_step(rng, size, true)
                    } else {
                        random_powered_step(rng, size, &variant.r)
                    }
                };
                let f = draw(rng);
                let g = draw(rng);
                (f, g, "independent")
            }
        };
        to_data(&OrderData { f, g, source: source.into() })
    }

    fn check(&self, variant: &Variant, data: &Value) -> Result<Outcome> {
        let d: OrderData = from_data(data)?;
        let tag = variant.tag()?;
        let cert = check_order(&d.f, &d.g, &OrderKind::new(tag, variant.r.clone()))?;
        let numeric = dense_order(&d.f, &d.g, tag, &variant.r, DENSE_POINTS);
        let out = Outcome::new(true)
            .count(if cert.holds { "holds" } else { "fails" })
            .note(format!("{} pair: exact {}, numeric {}", d.source, cert.holds, numeric));
        Ok(if cert.holds == numeric {
            out
        } else {
            out.fail(format!(
                "exact decision {} (witness {:?}) disagrees with dense grid {}",
                cert.holds,
                cert.witness.as_ref().map(rat::format),
                numeric
            ))
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TransferData {
    f: StepFunction,
    g: StepFunction,
    #[serde(with = "rat::serde_str")]
    eps: Rat,
}

pub struct TransferMap;

impl Lemma for TransferMap {
    fn tag(&self) -> &'static str {
        "transfer-map"
    }

    fn summary(&self) -> &'static str {
        "measure-preserving map between equimeasurable functions"
    }

    fn generate(&self, rng: &mut ChaCha8Rng, _variant: &Variant, size: usize) -> Result<Value> {
        let f = random_step(rng, size, true);
        let g = shuffle_pieces(rng, &f);
        let eps = rat::frac(1, rng.gen_range(1..=16));
        to_data(&TransferData { f, g, eps })
    }

    fn check(&self, _variant: &Variant, data: &Value) -> Result<Outcome> {
        let d: TransferData = from_data(data)?;
        if d.f.rearrange() != d.g.rearrange() {
            return Err(Error::Precondition("f and g are not equimeasurable".into()));
        }
        let map = build_transfer_map(&d.f, &d.g, &d.eps)?;
        let out = Outcome::new(true).observe("map pieces", map.pieces().len() as f64);
        Ok(match verify_transfer_map(&d.f, &d.g, &d.eps, &map) {
            Ok(()) => out,
            Err(e) => out.fail(format!("map verification: {e}")),
        })
    }
}
