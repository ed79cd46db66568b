//! Dilations `D_n`, upper Boyd index estimation, the operators `V` and `C`,
//! and the probe of the tail-majorization characterization on sequence spaces.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, Enclosure};
use crate::finseq::FinSeq;
use crate::generate::{gen_seq_pair_with, instance_rng};
use crate::interpolation::ratio_enclosure;
use crate::majorization::{check_order_seq, OrderKind, OrderTag};
use crate::oracle::NormOracle;
use crate::rat::{self, Rat};

/// `(D_n u)_k = u_{⌊k/n⌋}`.
pub fn dilate_seq(u: &FinSeq, n: usize) -> FinSeq {
    assert!(n > 0, "dilation factor must be positive");
    FinSeq::new(u.entries().iter().flat_map(|v| std::iter::repeat_n(v.clone(), n)).collect())
}

/// First `length` entries of `Vu = Σ_{n>=0} 2^{-n} D_{2^n} u`.
///
/// For index `k` the terms with `2^n > k` all read `u_0`; their sum is the
/// geometric tail `u_0 2^{1-N}`, `N` the least `n` with `2^n > k`.
pub fn v_op(u: &FinSeq, length: usize) -> FinSeq {
    let u0 = u.get(0);
    let out = (0..length)
        .map(|k| {
            let mut acc = Rat::zero();
            let mut n = 0i64;
            while (1usize << n) <= k {
                acc += u.get(k >> n) * rat::pow2(-n);
                n += 1;
            }
            acc + &u0 * rat::pow2(1 - n)
        })
        .collect();
    FinSeq::new(out)
}

/// First `length` running averages `(Cu)(n) = (n+1)^{-1} Σ_{i<=n} u_i`.
pub fn cesaro(u: &FinSeq, length: usize) -> FinSeq {
    let mut acc = Rat::zero();
    let out = (0..length)
        .map(|n| {
            acc += u.get(n);
            &acc / rat::int(n as i64 + 1)
        })
        .collect();
    FinSeq::new(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvReport {
    pub length: usize,
    pub holds: bool,
    /// `max_n (Cu)(n) / (Vu)(n)` over indices with `(Vu)(n) > 0`.
    #[serde(with = "rat::serde_str")]
    pub max_ratio: Rat,
    pub argmax: usize,
    pub first_violation: Option<usize>,
}

/// Checks `(Cu)(n) <= 3 (Vu)(n)` for `n < length`.
pub fn check_cv(u: &FinSeq, length: usize) -> Result<CvReport> {
    if !u.is_nonnegative() || !u.is_nonincreasing() {
        return Err(Error::Precondition("check_cv needs a nonnegative non-increasing sequence".into()));
    }
    let c = cesaro(u, length);
    let v = v_op(u, length);
    let three = rat::int(3);
    let mut report = CvReport { length, holds: true, max_ratio: Rat::zero(), argmax: 0, first_violation: None };
    for n in 0..length {
        let (cn, vn) = (c.get(n), v.get(n));
        if cn > &three * &vn {
            report.holds = false;
            report.first_violation.get_or_insert(n);
        }
        if vn.is_positive() {
            let r = cn / vn;
            if r > report.max_ratio {
                report.max_ratio = r;
                report.argmax = n;
            }
        }
    }
    Ok(report)
}

/// Decreasing probes of length `len`: 0/1 blocks of every dyadic length,
/// geometric decays `ρ^n` for `ρ ∈ {1/2, 3/4, 15/16}` and `e_0`.
pub fn default_probes(len: usize) -> Vec<FinSeq> {
    let mut out = vec![FinSeq::unit(0)];
    let mut b = 2;
    while b <= len {
        out.push(FinSeq::new(vec![rat::one(); b]));
        b *= 2;
    }
    for rho in [rat::frac(1, 2), rat::frac(3, 4), rat::frac(15, 16)] {
        out.push(FinSeq::new((0..len).map(|n| exact::pow_int(&rho, n as i64)).collect()));
    }
    out
}

/// Probes used when none are given.
pub const DEFAULT_PROBE_LEN: usize = 16;

/// Longest dilated probe evaluated.
pub const MAX_EVAL_LEN: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoydEstimate {
    pub oracle: String,
    pub ks: Vec<u64>,
    /// Lower bounds `max_u ‖D_k u‖/‖u‖` over the probes.
    pub norms: Vec<f64>,
    /// Least-squares slope of `log ‖D_k‖` against `log k`.
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    pub probes_used: usize,
    /// Some probe was dropped (oracle failure or length cap).
    pub flagged: bool,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let resid = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).abs()).fold(0.0, f64::max);
    (slope, intercept, resid)
}

/// Estimates `β_E` from `‖D_k‖` at dyadic `k ∈ {2, 4, ..., k_max}`.
pub fn boyd_upper(oracle: &dyn NormOracle, k_max: u64, probes: &[FinSeq]) -> Result<BoydEstimate> {
    if k_max < 4 {
        return Err(Error::Invalid("k_max must be at least 4 for a regression".into()));
    }
    let mut ks = Vec::new();
    let mut k = 2u64;
    while k <= k_max {
        ks.push(k);
        k *= 2;
    }
    let mut flagged = false;
    let mut live: Vec<(&FinSeq, Enclosure)> = Vec::new();
    for u in probes {
        match oracle.seq_norm(u) {
            Ok(n) if n.lo.is_positive() => live.push((u, n)),
            Ok(_) => {}
            Err(_) => flagged = true,
        }
    }
    if live.is_empty() {
        return Err(Error::Oracle("no probe has a positive norm".into()));
    }
    let mut best = vec![0f64; ks.len()];
    let mut keep = vec![true; live.len()];
    for (i, &k) in ks.iter().enumerate() {
        for (j, (u, nu)) in live.iter().enumerate() {
            if !keep[j] {
                continue;
            }
            if u.len().saturating_mul(k as usize) > MAX_EVAL_LEN {
                keep[j] = false;
                flagged = true;
                continue;
            }
            match oracle.seq_norm(&dilate_seq(u, k as usize)) {
                Ok(nd) => {
                    let r = ratio_enclosure(&nd, nu).expect("positive probe norm");
                    best[i] = best[i].max(rat::to_f64(&r.lo));
                }
                Err(_) => {
                    keep[j] = false;
                    flagged = true;
                }
            }
        }
    }
    let xs: Vec<f64> = ks.iter().map(|k| (*k as f64).ln()).collect();
    let ys: Vec<f64> = best.iter().map(|v| v.ln()).collect();
    let (slope, intercept, max_residual) = least_squares(&xs, &ys);
    Ok(BoydEstimate {
        oracle: oracle.name(),
        ks,
        norms: best,
        slope,
        intercept,
        max_residual,
        probes_used: keep.iter().filter(|k| **k).count(),
        flagged,
    })
}

/// One member of an explicit family with its certified ratio.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyRatio {
    pub n: u64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbePart {
    pub order: String,
    pub samples: usize,
    pub skipped: usize,
    pub errors: usize,
    pub max_ratio: f64,
    pub family: Vec<FamilyRatio>,
    /// Family ratios strictly increase and grow by at least a factor 2.
    pub unbounded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjReport {
    pub oracle: String,
    #[serde(with = "rat::serde_str")]
    pub q: Rat,
    pub tail_part: ProbePart,
    pub boyd: BoydEstimate,
    /// Exponent selected below `min(q, 1/β)`.
    #[serde(with = "rat::serde_str")]
    pub p: Rat,
    pub head_part: ProbePart,
    /// Tail ratios bounded and head ratios bounded at some `p < q`.
    pub interpolation_evidence: bool,
    pub inconsistencies: Vec<String>,
}

/// Family sizes for the explicit counterexample families.
pub const FAMILY_SIZES: std::ops::RangeInclusive<u32> = 4..=12;

/// Largest dyadic `s` (denominator `2^40`) with `s^q <= x`.
fn dyadic_root_below(x: &Rat, q: &Rat) -> Result<Rat> {
    let root = exact::pow_enclosure(x, &q.recip())?;
    let scale = rat::pow2(40);
    let mut s = (&root.lo * &scale).floor() / &scale;
    while exact::pow_enclosure(&s, q)?.hi > *x {
        s -= scale.recip();
    }
    Ok(s)
}

/// `v = s e_0` with `s^q <= N`, `u` = `N` ones: `|v|^q ≺≺_tl |u|^q`.
fn spike_and_spread(n: u64, q: &Rat) -> Result<(FinSeq, FinSeq)> {
    let count = rat::int(n as i64);
    let s = dyadic_root_below(&count, q)?;
    Ok((FinSeq::new(vec![s]), FinSeq::new(vec![rat::one(); n as usize])))
}

fn sample_part(
    oracle: &dyn NormOracle,
    kind: &OrderKind,
    samples: usize,
    seed: u64,
    family: impl Fn(u64) -> Result<(FinSeq, FinSeq)>,
) -> Result<ProbePart> {
    let mut part = ProbePart {
        order: kind.to_string(),
        samples,
        skipped: 0,
        errors: 0,
        max_ratio: 0.0,
        family: Vec::new(),
        unbounded: false,
    };
    for i in 0..samples {
        let mut rng = instance_rng(seed, i as u64);
        let size = rng.gen_range(1..=12);
        let scrambled = rng.gen_bool(0.5);
        let ratio = gen_seq_pair_with(&mut rng, kind.tag, size, &kind.r, scrambled)
            .and_then(|(u, v)| Ok(ratio_enclosure(&oracle.seq_norm(&v)?, &oracle.seq_norm(&u)?)));
        match ratio {
            Ok(Some(r)) => part.max_ratio = part.max_ratio.max(rat::to_f64(&r.hi)),
            Ok(None) => part.skipped += 1,
            Err(_) => part.errors += 1,
        }
    }
    for e in FAMILY_SIZES {
        let n = 1u64 << e;
        let (u, v) = family(n)?;
        if !check_order_seq(&u, &v, kind)?.holds {
            return Err(Error::Oracle(format!("family member N = {n} is not ordered by {kind}")));
        }
        let r = ratio_enclosure(&oracle.seq_norm(&v)?, &oracle.seq_norm(&u)?)
            .ok_or_else(|| Error::Oracle("family member with zero norm".into()))?;
        part.family.push(FamilyRatio { n, ratio_lo: rat::to_f64(&r.lo), ratio_hi: rat::to_f64(&r.hi) });
    }
    let fam = &part.family;
    part.unbounded =
        fam.windows(2).all(|w| w[1].ratio_lo > w[0].ratio_hi) && fam.last().unwrap().ratio_lo >= 2.0 * fam[0].ratio_hi;
    Ok(part)
}

/// Half of `min(q, 1/β)` rounded down to a multiple of `1/4`, clipped to `[1/4, 4]`.
fn select_p(q: &Rat, beta: f64) -> Rat {
    let inv = if beta > 1e-9 { 1.0 / beta } else { f64::INFINITY };
    let cap = rat::to_f64(q).min(inv);
    let quarters = ((cap / 2.0) * 4.0).floor().clamp(1.0, 16.0);
    rat::frac(quarters as i64, 4)
}

/// Boyd probe with regression over `k <= 2^10`.
pub const CONJ_K_MAX: u64 = 1 << 10;

/// Three-part probe: (1) ratio boundedness under `|v|^q ≺≺_tl |u|^q`,
/// (2) Boyd estimate and an exponent `p < min(q, 1/β̂)`, (3) ratio
/// boundedness under `|v|^p ≺≺_hd |u|^p`.
pub fn conj_lsz_probe(oracle: &dyn NormOracle, q: &Rat, samples: usize, seed: u64) -> Result<ConjReport> {
    if *q < Rat::one() {
        return Err(Error::Invalid("q must be at least 1".into()));
    }
    if !oracle.symmetric() {
        return Err(Error::Precondition(format!("oracle {} is not declared symmetric", oracle.name())));
    }
    let tail_kind = OrderKind::new(OrderTag::TailWeak, q.clone());
    let tail_part = sample_part(oracle, &tail_kind, samples, seed, |n| {
        let (v, u) = spike_and_spread(n, q)?;
        Ok((u, v))
    })?;
    let boyd = boyd_upper(oracle, CONJ_K_MAX, &default_probes(DEFAULT_PROBE_LEN))?;
    let p = select_p(q, boyd.slope);
    let head_kind = OrderKind::new(OrderTag::HeadWeak, p.clone());
    // the spread member is head-dominated by the spike
    let head_part = sample_part(oracle, &head_kind, samples, seed ^ 0x5eed, |n| spike_and_spread(n, &p))?;
    let mut inconsistencies = Vec::new();
    if !tail_part.unbounded && boyd.slope > 0.0 && 1.0 / boyd.slope > rat::to_f64(q) * (1.0 + 0.05) {
        inconsistencies.push(format!(
            "tail ratios bounded but 1/β̂ = {:.4} exceeds q = {}",
            1.0 / boyd.slope,
            rat::format(q)
        ));
    }
    if head_part.unbounded {
        inconsistencies.push(format!("head ratios unbounded at p = {} < 1/β̂", rat::format(&p)));
    }
    Ok(ConjReport {
        oracle: oracle.name(),
        q: q.clone(),
        interpolation_evidence: !tail_part.unbounded && !head_part.unbounded && p < *q,
        tail_part,
        boyd,
        p,
        head_part,
        inconsistencies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    #[test]
    fn v_examples() {
        let v = v_op(&FinSeq::unit(0), 4);
        assert_eq!(v.get(0), int(2));
        assert_eq!(v.get(1), int(1));
        assert_eq!(v.get(2), frac(1, 2));
        assert_eq!(v_op(&FinSeq::zero(), 5), FinSeq::zero());
    }

    #[test]
    fn p_selection() {
        assert_eq!(select_p(&int(1), 1.0), frac(1, 2));
        assert_eq!(select_p(&int(2), 0.25), int(1));
        assert_eq!(select_p(&int(8), 0.0), int(4));
        assert_eq!(select_p(&int(1), 4.0), frac(1, 4));
    }

    #[test]
    fn dyadic_root() {
        let s = dyadic_root_below(&int(32), &int(2)).unwrap();
        assert!(&s * &s <= int(32));
        assert!(rat::to_f64(&s) > 32f64.sqrt() - 1e-9);
        assert_eq!(dyadic_root_below(&int(16), &int(2)).unwrap(), int(4));
    }
}
