use majorn_core::exact::Extended;
use majorn_core::generate::{gen_decompose_pair, random_powered_step, random_rat, random_step};
use majorn_core::interpolation::{
    decompose_pq, k_l0_lq, k_l1_linf, ratio_enclosure, verify_decomposition, DIVERGENCE_GROWTH, FAMILY_LEVELS,
};
use majorn_core::oracle::parse_oracle;
use majorn_core::rat::{self, Rat};
use majorn_core::{check_order, Error, OrderKind, OrderTag, Result, StepFunction};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{exps, finite_pair, PairData};
use crate::lemma::{from_data, to_data, Bound, Instance, Lemma, Outcome, Variant};
use crate::numeric::{k_l0_lq_subsets, k_l1_linf_grid};

fn pq_variant(q: &Rat) -> Variant {
    let p = q / rat::int(2);
    Variant { label: format!("p={} q={}", rat::format(&p), rat::format(q)), r: q.clone(), kind: None }
}

/// Splits `g` into a head-majorized and a tail-majorized part (`p = q/2`).
pub struct Decompose;

impl Lemma for Decompose {
    fn tag(&self) -> &'static str {
        "decompose"
    }

    fn summary(&self) -> &'static str {
        "g = g1 + g2 with g1 head-majorized at p and g2 tail-majorized at q = 2p"
    }

    fn default_exponents(&self) -> Vec<Rat> {
        exps(&[(2, 1), (1, 1)])
    }

    fn variants(&self, exponents: &[Rat]) -> Result<Vec<Variant>> {
        Ok(exponents.iter().map(pq_variant).collect())
    }

    fn generate(&self, rng: &mut ChaCha8Rng, variant: &Variant, size: usize) -> Result<Value> {
        let q = &variant.r;
        let size = rng.gen_range(1..=size);
        let (f, g) = gen_decompose_pair(rng, &(q / rat::int(2)), q, size)?;
        to_data(&PairData { f, g })
    }

    fn check(&self, variant: &Variant, data: &Value) -> Result<Outcome> {
        let PairData { f, g } = from_data(data)?;
        let q = &variant.r;
        let p = q / rat::int(2);
        let d = decompose_pq(&f, &g, &p, q)?;
        let v = verify_decomposition(&f, &g, &p, q, &d)?;
        let head_only = check_order(&f, &g, &OrderKind::new(OrderTag::HeadWeak, p.clone()))?.holds;
        let mut out = Outcome::new(true).observe("A components", d.a.len() as f64).count(if head_only {
            "head-majorized input"
        } else {
            "mixed input"
        });
        if !v.additive {
            out = out.fail("g1 + g2 differs from g or a part is negative");
        }
        if !v.head.holds {
            out = out.fail(format!("g1 not head-majorized: {:?}", v.head.witness.as_ref().map(rat::format)));
        }
        if !v.tail.holds {
            out = out.fail(format!("g2 not tail-majorized: {:?}", v.tail.witness.as_ref().map(rat::format)));
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct KData {
    f: StepFunction,
    #[serde(with = "rat::serde_str")]
    t: Rat,
}

/// Largest piece count the subset oracle enumerates.
pub const SUBSET_PIECES: usize = 10;

pub struct KL0Lq;

impl Lemma for KL0Lq {
    fn tag(&self) -> &'static str {
        "kfun-l0lq"
    }

    fn summary(&self) -> &'static str {
        "(L_0, L_q) K-functional against subset enumeration at breakpoint-aligned t"
    }

    fn default_exponents(&self) -> Vec<Rat> {
        exps(&[(1, 2), (1, 1), (2, 1)])
    }

    fn default_size(&self) -> usize {
        8
    }

    fn generate(&self, rng: &mut ChaCha8Rng, variant: &Variant, size: usize) -> Result<Value> {
        let f = random_powered_step(rng, size.min(SUBSET_PIECES), &variant.r);
        let mu = f.rearrange();
        let k = rng.gen_range(0..=mu.pieces().len());
        let t = mu.pieces()[..k].iter().map(|p| p.len.clone()).sum();
        to_data(&KData { f, t })
    }

    fn check(&self, variant: &Variant, data: &Value) -> Result<Outcome> {
        let KData { f, t } = from_data(data)?;
        if f.pieces().len() > SUBSET_PIECES || !f.tail().is_zero() {
            return Err(Error::Precondition(format!("oracle needs a zero tail and at most {SUBSET_PIECES} pieces")));
        }
        let want = k_l0_lq_subsets(&f, &t, &variant.r)?;
        let got = k_l0_lq(&f, &t, &variant.r)?;
        let out = Outcome::new(true).observe("K", rat::to_f64(&want));
        Ok(match got.as_exact() {
            Some(v) if *v == want => out,
            _ => out.fail(format!("K = {got:?}, subset oracle {}", rat::format(&want))),
        })
    }
}

pub struct KL1Linf;

/// Grid resolution of the level oracle, in bits.
pub const LEVEL_BITS: u32 = 10;

impl Lemma for KL1Linf {
    fn tag(&self) -> &'static str {
        "kfun-l1linf"
    }

    fn summary(&self) -> &'static str {
        "(L_1, L_inf) K-functional against a level-grid minimization"
    }

    fn generate(&self, rng: &mut ChaCha8Rng, _variant: &Variant, size: usize) -> Result<Value> {
        let f = random_step(rng, size, false);
        let t = random_rat(rng, 12, 4);
        to_data(&KData { f, t })
    }

    fn check(&self, _variant: &Variant, data: &Value) -> Result<Outcome> {
        let KData { f, t } = from_data(data)?;
        if !f.tail().is_zero() {
            return Err(Error::Precondition("the level oracle needs a zero tail".into()));
        }
        let got = k_l1_linf(&f, &t);
        let (grid, res) = k_l1_linf_grid(&f, &t, LEVEL_BITS);
        let gap = &grid - &got;
        let out = Outcome::new(true).observe("grid gap", rat::to_f64(&gap));
        Ok(if got <= grid && gap <= res {
            out
        } else {
            out.fail(format!(
                "K = {}, grid minimum {} with resolution {}",
                rat::format(&got),
                rat::format(&grid),
                rat::format(&res)
            ))
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct ProbeData {
    pub oracle: String,
    pub kind: OrderKind,
    pub pairs: Vec<PairData>,
    /// Claimed monotonicity constant; without it a family fails only by diverging.
    #[serde(with = "rat::serde_opt", default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<Rat>,
}

/// Monotonicity of an oracle norm along an order: `g ≺ f` should give `‖g‖ <= C‖f‖`.
pub struct MonotoneProbe;

impl Lemma for MonotoneProbe {
    fn tag(&self) -> &'static str {
        "monotone-probe"
    }

    fn summary(&self) -> &'static str {
        "norm monotonicity along an order; L_r with constant 1 in campaigns"
    }

    fn default_exponents(&self) -> Vec<Rat> {
        exps(&[(1, 2), (1, 1), (2, 1)])
    }

    fn variants(&self, exponents: &[Rat]) -> Result<Vec<Variant>> {
        Ok([OrderTag::HeadWeak, OrderTag::TailWeak]
            .iter()
            .flat_map(|t| exponents.iter().map(|r| Variant::with_kind(*t, r)))
            .collect())
    }

    fn bounds(&self, _variant: &Variant) -> Vec<Bound> {
        vec![Bound::new("max ratio", "1", 1.0)]
    }

    fn generate(&self, rng: &mut ChaCha8Rng, variant: &Variant, size: usize) -> Result<Value> {
        let kind = OrderKind::new(variant.tag()?, variant.r.clone());
        let size = rng.gen_range(1..=size);
        let (f, g) = finite_pair(rng, &kind, size)?;
        to_data(&ProbeData {
            oracle: format!("lp:{}", rat::format(&variant.r)),
            kind,
            pairs: vec![PairData { f, g }],
            constant: Some(rat::one()),
        })
    }

    fn check(&self, _variant: &Variant, data: &Value) -> Result<Outcome> {
        let d: ProbeData = from_data(data)?;
        let oracle = parse_oracle(&d.oracle)?;
        if !oracle.supports_step() {
            return Err(Error::Unsupported(format!("oracle {} has no function-space norm", oracle.name())));
        }
        let mut out = Outcome::new(true);
        // (lo, hi) bounds of each ratio ‖g‖/‖f‖
        let mut ratios: Vec<(f64, f64)> = Vec::new();
        let mut exceeded = None;
        for (i, pair) in d.pairs.iter().enumerate() {
            let cert = check_order(&pair.f, &pair.g, &d.kind)?;
            if !cert.holds {
                return Err(Error::Precondition(format!(
                    "pair {i}: g is not {}-majorized by f (witness {})",
                    d.kind,
                    cert.witness.as_ref().map(rat::format).unwrap_or_default()
                )));
            }
            let (nf, ng) = (oracle.step_norm(&pair.f)?, oracle.step_norm(&pair.g)?);
            let ratio = match (&nf, &ng) {
                (Extended::Infinite, _) => {
                    out = out.note(format!("pair {i}: ‖f‖ = inf, skipped"));
                    continue;
                }
                (Extended::Finite(_), Extended::Infinite) => (f64::INFINITY, f64::INFINITY),
                (Extended::Finite(a), Extended::Finite(b)) => match ratio_enclosure(b, a) {
                    Some(r) => {
                        if let Some(c) = &d.constant {
                            if r.lo > *c && exceeded.is_none() {
                                exceeded = Some((i, r.lo.clone()));
                            }
                        }
                        (rat::to_f64(&r.lo), rat::to_f64(&r.hi))
                    }
                    None => {
                        out = out.note(format!("pair {i}: ‖f‖ = 0, skipped"));
                        continue;
                    }
                },
            };
            out = out.note(format!("pair {i}: ‖g‖/‖f‖ in [{:.6e}, {:.6e}]", ratio.0, ratio.1));
            ratios.push(ratio);
        }
        let max = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
        out = out.observe("max ratio", max);
        if ratios.iter().any(|r| r.0.is_infinite()) {
            return Ok(out.fail("‖g‖ infinite with ‖f‖ finite"));
        }
        if let Some((i, lo)) = exceeded {
            return Ok(out.fail(format!(
                "pair {i}: ratio at least {} exceeds the constant {}",
                rat::to_f64(&lo),
                d.constant.as_ref().map(rat::format).unwrap_or_default()
            )));
        }
        let divergent = ratios.len() >= 2
            && ratios.windows(2).all(|w| w[1].0 > w[0].1)
            && ratios.last().unwrap().0 >= DIVERGENCE_GROWTH * ratios[0].1;
        Ok(if divergent { out.fail("ratios grow without bound along the family") } else { out })
    }
}

/// Replayable spike-versus-plateau family: the spike `S` with `S^r = N·χ(0,1/N)`
/// against the plateau `χ(0,1)`, `N = 2^{k·m}` for `r = m/n`, `k = 1..=levels`.
/// Head orders place the spike above, tail orders below.
pub fn spike_plateau_family(oracle: &str, kind: &OrderKind, levels: Option<u32>) -> Result<Instance> {
    let (m, n) = (
        kind.r.numer().to_i64().ok_or_else(|| Error::Unsupported("exponent too large".into()))?,
        kind.r.denom().to_i64().ok_or_else(|| Error::Unsupported("exponent too large".into()))?,
    );
    let plateau = StepFunction::indicator(Rat::zero(), rat::one(), rat::one());
    let pairs = (1..=levels.unwrap_or(FAMILY_LEVELS) as i64)
        .map(|k| {
            let big_n = rat::pow2(k * m);
            let spike = StepFunction::indicator(Rat::zero(), big_n.recip(), rat::pow2(k * n));
            if kind.tag.is_head() {
                PairData { f: spike, g: plateau.clone() }
            } else {
                PairData { f: plateau.clone(), g: spike }
            }
        })
        .collect();
    let data = ProbeData { oracle: oracle.to_string(), kind: kind.clone(), pairs, constant: None };
    Ok(Instance {
        lemma: MonotoneProbe.tag().to_string(),
        variant: Variant::with_kind(kind.tag, &kind.r),
        data: to_data(&data)?,
    })
}
