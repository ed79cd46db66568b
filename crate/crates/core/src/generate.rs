//! Seeded generators of ordered pairs for every majorization kind.
//!
//! Functions are built so that `|h|^r` stays rational: for `r = m/n` every
//! value is `w^n` for a small rational `w`, hence its `r`-th power is `w^m`.
//! Dominated members come from local averaging of the `r`-th powers, with the
//! averaging level itself chosen as an `m`-th power and the block end solved
//! exactly. Every pair is re-certified with [`check_order`] before it is
//! returned.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::{pow_int, pow_required};
use crate::finseq::FinSeq;
use crate::majorization::{check_order, check_order_seq, OrderKind, OrderTag};
use crate::rat::{self, Rat};
use crate::stepfn::StepFunction;

/// Attempts per instance before giving up.
pub const RETRY_BUDGET: usize = 100;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for instance `index` of a campaign: the campaign seed picks the
/// key, the index picks an independent ChaCha stream.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn exponent_parts(r: &Rat) -> (i64, i64) {
    let m: i64 = r.numer().try_into().expect("small exponent");
    let n: i64 = r.denom().try_into().expect("small exponent");
    (m, n)
}

pub fn random_rat(rng: &mut impl Rng, max_num: i64, max_den: i64) -> Rat {
    rat::frac(rng.gen_range(1..=max_num), rng.gen_range(1..=max_den))
}

fn random_len(rng: &mut impl Rng) -> Rat {
    rat::frac(rng.gen_range(1..=6), *[1, 2, 4].choose(rng).unwrap())
}

/// Arbitrary (not necessarily monotone) nonnegative step function, possibly with a positive tail.
pub fn random_step(rng: &mut impl Rng, max_pieces: usize, allow_tail: bool) -> StepFunction {
    let n = rng.gen_range(1..=max_pieces);
    let pieces = (0..n)
        .map(|_| {
            let v = if rng.gen_bool(0.15) { Rat::zero() } else { random_rat(rng, 8, 3) };
            (random_len(rng), v)
        })
        .collect();
    let tail = if allow_tail && rng.gen_bool(0.25) { random_rat(rng, 4, 3) } else { Rat::zero() };
    StepFunction::from_parts(pieces, tail)
}

/// Random `L_r` step function with arbitrary piece order whose values keep `|h|^r` rational.
pub fn random_powered_step(rng: &mut impl Rng, max_pieces: usize, r: &Rat) -> StepFunction {
    let (_, n) = exponent_parts(r);
    let k = rng.gen_range(1..=max_pieces);
    let pieces = (0..k)
        .map(|_| {
            let v = if rng.gen_bool(0.1) { Rat::zero() } else { pow_int(&random_rat(rng, 6, 3), n) };
            (random_len(rng), v)
        })
        .collect();
    StepFunction::from_parts(pieces, Rat::zero())
}

/// Decreasing profile of `r`-th powers: `size` pieces with values `w^m`.
fn decreasing_powers(rng: &mut impl Rng, size: usize, m: i64, tail_base: &Rat) -> (StepFunction, Vec<Rat>) {
    let mut bases: Vec<Rat> = (0..size).map(|_| tail_base + random_rat(rng, 6, 3)).collect();
    bases.sort_by(|a, b| b.cmp(a));
    let pieces = bases.iter().map(|w| (random_len(rng), pow_int(w, m))).collect();
    (StepFunction::from_parts(pieces, pow_int(tail_base, m)), bases)
}

/// Averages the decreasing function `h` on `[a, b)` where `b` is chosen so the
/// average equals `c`; requires `h(a) > c > tail(h)`.
fn average_block(h: &StepFunction, a: &Rat, c: &Rat) -> StepFunction {
    debug_assert!(h.value_at(a) > *c && h.tail() < c);
    let mut s = Rat::zero();
    let mut b = None;
    for (cell, v) in h.cells() {
        let Some(cell) = cell.intersect(&crate::interval::Interval::unbounded(a.clone())) else {
            continue;
        };
        match cell.length() {
            Some(len) => {
                let next = &s + (&v - c) * &len;
                if v < *c && !next.is_positive() {
                    b = Some(&cell.start + &s / (c - &v));
                    break;
                }
                s = next;
            }
            None => {
                // on the tail v < c by assumption
                b = Some(&cell.start + &s / (c - &v));
                break;
            }
        }
    }
    let b = b.expect("average reaches c");
    let mut pieces = h.window(&Rat::zero(), a);
    pieces.push((&b - a, c.clone()));
    let span = h.span();
    if b < span {
        pieces.extend(h.window(&b, &span));
    }
    StepFunction::from_parts(pieces, h.tail().clone())
}

/// One to three averaging blocks of a decreasing `m`-th-power profile.
fn averaged(rng: &mut impl Rng, h: &StepFunction, m: i64) -> StepFunction {
    let mut cur = h.clone();
    for _ in 0..rng.gen_range(1..=3) {
        let bps = cur.breakpoints();
        let candidates: Vec<&Rat> = bps[..bps.len() - 1].iter().collect();
        if candidates.is_empty() {
            break;
        }
        let j = rng.gen_range(0..candidates.len());
        let a = candidates[j].clone();
        let top = cur.value_at(&a);
        // keep blocks local: the level sits between this piece and one a little further on
        let below = cur.pieces().get(j + rng.gen_range(1..=2)).map_or_else(|| cur.tail().clone(), |p| p.val.clone());
        let (Some(w_top), Some(w_lo)) =
            (crate::exact::nth_root_exact(&top, m as u32), crate::exact::nth_root_exact(&below, m as u32))
        else {
            break;
        };
        let k = rng.gen_range(1..=4);
        let w = &w_lo + (&w_top - &w_lo) * rat::frac(k, k + 1);
        let c = pow_int(&w, m);
        if c >= top || c <= *cur.tail() {
            continue;
        }
        cur = average_block(&cur, &a, &c);
    }
    cur
}

fn lower(rng: &mut impl Rng, h: &StepFunction, m: i64) -> StepFunction {
    let mut out = h.clone();
    if rng.gen_bool(0.5) {
        let k = rng.gen_range(1..=4);
        out = out.scale(&pow_int(&rat::frac(k, k + 1), m));
    }
    if rng.gen_bool(0.4) && out.pieces().len() > 1 {
        // drop the last piece
        let keep = out.pieces().len() - 1;
        let pieces = out.pieces()[..keep].iter().map(|p| (p.len.clone(), p.val.clone())).collect();
        out = StepFunction::from_parts(pieces, Rat::zero());
    }
    out
}

fn raise_tail(rng: &mut impl Rng, h: &StepFunction, m: i64) -> StepFunction {
    let last = h.pieces().last().map(|p| p.val.clone()).unwrap_or_else(Rat::zero);
    let Some(w_last) = crate::exact::nth_root_exact(&last, m as u32) else { return h.clone() };
    let w = &w_last * rat::frac(1, rng.gen_range(2..=4));
    let mut pieces: Vec<(Rat, Rat)> = h.pieces().iter().map(|p| (p.len.clone(), p.val.clone())).collect();
    pieces.push((random_len(rng), pow_int(&w, m)));
    StepFunction::from_parts(pieces, h.tail().clone())
}

fn root(h: &StepFunction, r: &Rat) -> Result<StepFunction> {
    h.pow(&r.recip())
}

/// One candidate pair `(f, g)` in terms of their `r`-th powers.
fn candidate(rng: &mut impl Rng, kind: &OrderKind, size: usize) -> (StepFunction, StepFunction) {
    let (m, _) = exponent_parts(&kind.r);
    let tail_base =
        if kind.tag == OrderTag::HeadWeak && rng.gen_bool(0.25) { random_rat(rng, 2, 3) } else { Rat::zero() };
    let (top, _) = decreasing_powers(rng, size, m, &tail_base);
    let avg = averaged(rng, &top, m);
    match kind.tag {
        OrderTag::HeadEqual => (top, avg),
        OrderTag::HeadWeak => (top, lower(rng, &avg, m)),
        OrderTag::TailEqual => (avg, top),
        OrderTag::TailWeak => {
            let g = lower(rng, &top, m);
            let f = if rng.gen_bool(0.3) { raise_tail(rng, &avg, m) } else { avg };
            (f, g)
        }
    }
}

/// Ordered pair with `g` below `f` in the given order; both non-increasing.
pub fn gen_pair_with(rng: &mut impl Rng, kind: &OrderKind, size: usize) -> Result<(StepFunction, StepFunction)> {
    if size == 0 {
        return Err(Error::Invalid("size must be positive".into()));
    }
    for _ in 0..RETRY_BUDGET {
        let (m, _) = exponent_parts(&kind.r);
        if size == 1 {
            let (top, _) = decreasing_powers(rng, 1, m, &Rat::zero());
            let f = root(&top, &kind.r)?;
            return Ok((f.clone(), f));
        }
        let (fp, gp) = candidate(rng, kind, size);
        let f = root(&fp, &kind.r)?;
        let g = root(&gp, &kind.r)?;
        if check_order(&f, &g, kind)?.holds {
            return Ok((f, g));
        }
    }
    Err(Error::Oracle(format!("no {kind} pair within {RETRY_BUDGET} attempts")))
}

pub fn gen_pair(seed: u64, kind: &OrderKind, size: usize) -> Result<(StepFunction, StepFunction)> {
    gen_pair_with(&mut rng_from_seed(seed), kind, size)
}

/// Values `w^n` (so that `|x|^p = w^m`), sorted decreasingly.
fn decreasing_seq(rng: &mut impl Rng, size: usize, n: i64) -> Vec<Rat> {
    let mut v: Vec<Rat> = (0..size).map(|_| pow_int(&random_rat(rng, 6, 3), n)).collect();
    v.sort_by(|a, b| b.cmp(a));
    v
}

fn seq_candidate(rng: &mut impl Rng, tag: OrderTag, size: usize, p: &Rat) -> Result<(Vec<Rat>, Vec<Rat>)> {
    let (m, n) = exponent_parts(p);
    let a = decreasing_seq(rng, size, n);
    let b = match tag {
        OrderTag::HeadWeak | OrderTag::HeadEqual => {
            // spread one entry into s^m copies of value a_k / s^n
            let mut b = a.clone();
            let k = rng.gen_range(0..a.len());
            let s = rat::int(rng.gen_range(2..=3));
            let copies = pow_int(&s, m).to_integer();
            let copies: usize = copies.try_into().map_err(|_| Error::Unsupported("exponent too large".into()))?;
            let piece = &a[k] / pow_int(&s, n);
            b[k] = piece.clone();
            b.extend(std::iter::repeat_n(piece, copies - 1));
            if tag == OrderTag::HeadWeak && rng.gen_bool(0.5) {
                let t = rng.gen_range(1..=4);
                let theta = pow_int(&rat::frac(t, t + 1), n);
                for x in b.iter_mut().skip(rng.gen_range(0..size)) {
                    *x = &*x * &theta;
                }
            }
            b
        }
        OrderTag::TailWeak | OrderTag::TailEqual => {
            let shift = rng.gen_range(0..=1);
            let t = rng.gen_range(2..=5);
            let theta = pow_int(&rat::frac(t, t + 1), n);
            let mut b: Vec<Rat> = (0..size).map(|k| a.get(k + shift).map_or_else(Rat::zero, |x| x * &theta)).collect();
            // head entry as large as the tail inequality at index 0 allows
            let ap: Vec<Rat> = a.iter().map(|x| pow_required(x, p)).collect::<Result<_>>()?;
            let bp_rest: Rat = b[1..].iter().map(|x| pow_required(x, p)).sum::<Result<Rat>>()?;
            let budget: Rat = ap.iter().sum::<Rat>() - bp_rest;
            for lambda in [rat::int(2), rat::frac(3, 2), rat::frac(5, 4), rat::one(), rat::frac(1, 2)] {
                let cand = &a[0] * pow_int(&lambda, n);
                if pow_required(&cand, p)? <= budget {
                    b[0] = cand;
                    break;
                }
            }
            b
        }
    };
    Ok((a, b))
}

fn scramble(rng: &mut impl Rng, v: &mut [Rat], signs: bool) {
    v.shuffle(rng);
    if signs {
        for x in v.iter_mut() {
            if rng.gen_bool(0.3) {
                *x = -x.clone();
            }
        }
    }
}

/// Sequence pair `(a, b)` with `|b|^p` below `|a|^p`; with `scrambled` the
/// entries are permuted and signs flipped at random.
pub fn gen_seq_pair_with(
    rng: &mut impl Rng,
    tag: OrderTag,
    size: usize,
    p: &Rat,
    scrambled: bool,
) -> Result<(FinSeq, FinSeq)> {
    let kind = OrderKind::new(tag, p.clone());
    for _ in 0..RETRY_BUDGET {
        let (mut a, mut b) = seq_candidate(rng, tag, size, p)?;
        if scrambled {
            let len = a.len().max(b.len());
            a.resize(len, Rat::zero());
            b.resize(len, Rat::zero());
            scramble(rng, &mut a, true);
            scramble(rng, &mut b, true);
        }
        let (a, b) = (FinSeq::new(a), FinSeq::new(b));
        if check_order_seq(&a, &b, &kind)?.holds {
            return Ok((a, b));
        }
    }
    Err(Error::Oracle(format!("no sequence pair for {kind} within {RETRY_BUDGET} attempts")))
}

/// Pair `(f, g)` of non-increasing functions with zero tails such that at every
/// `t` either `∫_0^t g^p <= ∫_0^t f^p` or `∫_t^∞ g^q <= ∫_t^∞ f^q`.
///
/// `g` is the rearrangement of a lowered copy of `f` before a random cut and
/// of reshaped pieces (taller and shorter, `q`-mass not increased) after it.
/// Candidates where the head inequality fails somewhere are preferred.
pub fn gen_decompose_pair(rng: &mut impl Rng, p: &Rat, q: &Rat, size: usize) -> Result<(StepFunction, StepFunction)> {
    if size == 0 {
        return Err(Error::Invalid("size must be positive".into()));
    }
    let n = num_integer::lcm(exponent_parts(p).1, exponent_parts(q).1);
    let (nq, _) = exponent_parts(&(q * rat::int(n)));
    let mut fallback = None;
    for _ in 0..RETRY_BUDGET {
        let (f, _) = decreasing_powers(rng, size, n, &Rat::zero());
        let cut = rng.gen_range(0..=f.pieces().len());
        let mut pieces = Vec::with_capacity(f.pieces().len());
        for (i, piece) in f.pieces().iter().enumerate() {
            if i < cut {
                let k = rng.gen_range(1..=6);
                let theta = if k == 6 { rat::one() } else { pow_int(&rat::frac(k, k + 1), n) };
                pieces.push((piece.len.clone(), &piece.val * theta));
            } else {
                let s = [rat::one(), rat::frac(5, 4), rat::frac(3, 2), rat::int(2)].choose(rng).unwrap().clone();
                let shrink = pow_int(&s, nq).recip() * rat::frac(rng.gen_range(1..=4), 4);
                pieces.push((&piece.len * shrink, &piece.val * pow_int(&s, n)));
            }
        }
        let g = StepFunction::from_parts(pieces, Rat::zero()).rearrange();
        if !crate::interpolation::check_alternative(&f, &g, p, q)?.holds {
            continue;
        }
        let head = check_order(&f, &g, &OrderKind::new(OrderTag::HeadWeak, p.clone()))?;
        if !head.holds {
            return Ok((f, g));
        }
        fallback.get_or_insert((f, g));
    }
    fallback.ok_or_else(|| Error::Oracle(format!("no decomposable pair within {RETRY_BUDGET} attempts")))
}

/// Random nonnegative non-increasing sequence of the given length.
pub fn random_decreasing_seq(rng: &mut impl Rng, len: usize) -> FinSeq {
    let mut v: Vec<Rat> = (0..len)
        .map(|_| Rat::new(BigInt::from(rng.gen_range(0..=1000)), BigInt::from(rng.gen_range(1..=10))))
        .collect();
    v.sort_by(|a, b| b.cmp(a));
    FinSeq::new(v)
}

/// Random permutation of the pieces of `h` (same rearrangement).
pub fn shuffle_pieces(rng: &mut impl Rng, h: &StepFunction) -> StepFunction {
    let mut pieces: Vec<(Rat, Rat)> = h.pieces().iter().map(|p| (p.len.clone(), p.val.clone())).collect();
    pieces.shuffle(rng);
    StepFunction::from_parts(pieces, h.tail().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    #[test]
    fn size_one_is_identity() {
        let k = OrderKind::new(OrderTag::HeadWeak, int(1));
        let (f, g) = gen_pair(3, &k, 1).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn documented_seeds_certify() {
        for (seed, tag, r) in [(42, OrderTag::HeadEqual, int(1)), (7, OrderTag::TailWeak, int(2))] {
            let k = OrderKind::new(tag, r);
            let (f, g) = gen_pair(seed, &k, 8).unwrap();
            assert!(check_order(&f, &g, &k).unwrap().holds);
        }
    }

    #[test]
    fn all_kinds_and_exponents_generate() {
        let mut rng = rng_from_seed(11);
        for tag in OrderTag::ALL {
            for r in [frac(1, 2), int(1), int(2), frac(3, 2)] {
                let k = OrderKind::new(tag, r);
                for _ in 0..20 {
                    let (f, g) = gen_pair_with(&mut rng, &k, 6).unwrap();
                    assert!(f.is_decreasing_rearrangement() && g.is_decreasing_rearrangement());
                }
            }
        }
    }

    #[test]
    fn sequence_pairs_generate() {
        let mut rng = rng_from_seed(5);
        for tag in [OrderTag::HeadWeak, OrderTag::TailWeak] {
            for p in [int(1), int(2)] {
                for _ in 0..20 {
                    gen_seq_pair_with(&mut rng, tag, 5, &p, true).unwrap();
                }
            }
        }
    }

    #[test]
    fn average_block_preserves_mass() {
        let h = StepFunction::from_parts(vec![(int(1), int(4)), (int(1), int(2))], int(0));
        let g = average_block(&h, &int(0), &int(2));
        assert_eq!(g.integral(), h.integral());
        assert_eq!(g, StepFunction::indicator(int(0), int(3), int(2)));
    }
}
