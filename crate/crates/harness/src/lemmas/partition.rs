use majorn_core::generate::{gen_pair_with, gen_seq_pair_with};
use majorn_core::partitions::{
    partition_head, partition_pairs, partition_seq, partition_tail, verify_head_partition, verify_pairs,
    verify_seq_cover, verify_tail_partition,
};
use majorn_core::{OrderKind, OrderTag, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::{finite_pair, PairData, SeqPairData};
use crate::lemma::{from_data, to_data, Bound, Lemma, Outcome, Variant};

/// `(f^r, g^r)` for a generated pair ordered at exponent `r`, which is then
/// ordered at exponent 1.
fn powered_pair(rng: &mut ChaCha8Rng, tag: OrderTag, variant: &Variant, size: usize, finite: bool) -> Result<Value> {
    let kind = OrderKind::new(tag, variant.r.clone());
    let size = rng.gen_range(1..=size);
    let (f, g) = if finite { finite_pair(rng, &kind, size)? } else { gen_pair_with(rng, &kind, size)? };
    to_data(&PairData { f: f.pow(&variant.r)?, g: g.pow(&variant.r)? })
}

fn verdict(parts: usize, verified: Result<()>) -> Outcome {
    let out = Outcome::new(true).observe("parts", parts as f64);
    match verified {
        Ok(()) => out,
        Err(e) => out.fail(format!("postcondition: {e}")),
    }
}

pub struct Pairs;

impl Lemma for Pairs {
    fn tag(&self) -> &'static str {
        "partition-pairs"
    }

    fn summary(&self) -> &'static str {
        "interval pairs carrying the surplus of f onto the excess of g (equal masses)"
    }

    fn generate(&self, rng: &mut ChaCha8Rng, variant: &Variant, size: usize) -> Result<Value> {
        powered_pair(rng, OrderTag::HeadEqual, variant, size, true)
    }

    fn check(&self, _variant: &Variant, data: &Value) -> Result<Outcome> {
        let PairData { f, g } = from_data(data)?;
        let part = partition_pairs(&f, &g)?;
        Ok(verdict(part.pairs.len(), verify_pairs(&f, &g, &part)))
    }
}

pub struct Head;

impl Lemma for Head {
    fn tag(&self) -> &'static str {
        "partition-head"
    }

    fn summary(&self) -> &'static str {
        "blocks with restricted head majorization and complement domination"
    }

    fn generate(&self, rng: &mut ChaCha8Rng, variant: &Variant, size: usize) -> Result<Value> {
        powered_pair(rng, OrderTag::HeadWeak, variant, size, false)
    }

    fn check(&self, _variant: &Variant, data: &Value) -> Result<Outcome> {
        let PairData { f, g } = from_data(data)?;
        let part = partition_head(&f, &g)?;
        Ok(verdict(part.deltas.len(), verify_head_partition(&f, &g, &part)))
    }
}

pub struct Tail;

impl Lemma for Tail {
    fn tag(&self) -> &'static str {
        "partition-tail"
    }

    fn summary(&self) -> &'static str {
        "blocks with restricted tail majorization and complement domination"
    }

    fn generate(&self, rng: &mut ChaCha8Rng, variant: &Variant, size: usize) -> Result<Value> {
        powered_pair(rng, OrderTag::TailWeak, variant, size, true)
    }

    fn check(&self, _variant: &Variant, data: &Value) -> Result<Outcome> {
        let PairData { f, g } = from_data(data)?;
        let part = partition_tail(&f, &g)?;
        Ok(verdict(part.deltas.len(), verify_tail_partition(&f, &g, &part)))
    }
}

pub struct Seq;

impl Lemma for Seq {
    fn tag(&self) -> &'static str {
        "seq-partition"
    }

    fn summary(&self) -> &'static str {
        "index sets for tail-majorized sequences, each index in at most three sets"
    }

    fn default_size(&self) -> usize {
        9
    }

    fn bounds(&self, _variant: &Variant) -> Vec<Bound> {
        vec![Bound::new("max overlap", "3", 3.0)]
    }

    fn generate(&self, rng: &mut ChaCha8Rng, variant: &Variant, size: usize) -> Result<Value> {
        let n = rng.gen_range(1..=size);
        let (a, b) = gen_seq_pair_with(rng, OrderTag::TailWeak, n, &variant.r, false)?;
        to_data(&SeqPairData { a, b })
    }

    fn check(&self, _variant: &Variant, data: &Value) -> Result<Outcome> {
        let SeqPairData { a, b } = from_data(data)?;
        let cover = partition_seq(&a, &b)?;
        let hist = cover.overlap_histogram();
        let max = hist.keys().max().copied().unwrap_or(0);
        let mut out = verdict(cover.sets.len(), verify_seq_cover(&a, &b, &cover)).observe("max overlap", max as f64);
        for (k, n) in &hist {
            out = out.count_n(format!("overlap {k}"), *n as u64);
        }
        Ok(if max > 3 { out.fail(format!("an index lies in {max} sets")) } else { out })
    }
}
