//! K-functionals, Holmstedt terms for `(L_p, L_q)`, the head/tail
//! decomposition of a function satisfying the alternative inequalities, and
//! sampling-based membership probes.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Enclosure, Extended};
use crate::finseq::FinSeq;
use crate::generate::{gen_pair_with, gen_seq_pair_with, instance_rng};
use crate::interval::Interval;
use crate::majorization::{check_order, check_order_seq, Certificate, OrderKind, OrderTag, Powered};
use crate::operators::Operand;
use crate::oracle::NormOracle;
use crate::rat::{self, Rat};
use crate::stepfn::StepFunction;

/// `K_t(f; L_1, L_∞) = ∫_0^t μ(f)`.
pub fn k_l1_linf(f: &StepFunction, t: &Rat) -> Rat {
    f.head_integral(t)
}

/// `inf{‖f - h‖_q^q : ‖h‖_0 <= t} = ∫_t^∞ μ(f)^q`.
pub fn k_l0_lq(f: &StepFunction, t: &Rat, q: &Rat) -> Result<Extended> {
    f.tail_integral(t, q)
}

/// `α` with `1/α = 1/p - 1/q`.
pub fn holmstedt_alpha(p: &Rat, q: &Rat) -> Result<Rat> {
    if !p.is_positive() || q <= p {
        return Err(Error::Invalid("Holmstedt terms need 0 < p < q < ∞".into()));
    }
    Ok(p * q / (q - p))
}

/// The two Holmstedt terms at cut `t^α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HolmstedtPair {
    pub cut: Enclosure,
    /// `(∫_0^{t^α} μ(f)^p)^{1/p}`.
    pub head: Enclosure,
    /// `t (∫_{t^α}^∞ μ(f)^q)^{1/q}`.
    pub tail: Extended,
}

impl HolmstedtPair {
    pub fn sum(&self) -> Extended {
        match &self.tail {
            Extended::Finite(e) => Extended::Finite(self.head.add(e)),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

fn head_power_integral(mu: &Powered, c: &Rat) -> Enclosure {
    mu.cumulative(std::slice::from_ref(c)).pop().expect("one grid point")
}

pub fn holmstedt_pair(f: &StepFunction, t: &Rat, p: &Rat, q: &Rat) -> Result<HolmstedtPair> {
    if !t.is_positive() {
        return Err(Error::Invalid("Holmstedt terms need t > 0".into()));
    }
    let alpha = holmstedt_alpha(p, q)?;
    let cut = exact::pow_enclosure(t, &alpha)?;
    let mu = Powered::new(&f.rearrange(), p)?;
    // the head integral increases and the tail integral decreases with the cut
    let head_pow = Enclosure { lo: head_power_integral(&mu, &cut.lo).lo, hi: head_power_integral(&mu, &cut.hi).hi };
    let head = head_pow.pow(&p.recip())?;
    let tail = match (f.tail_integral(&cut.hi, q)?, f.tail_integral(&cut.lo, q)?) {
        (Extended::Finite(lo), Extended::Finite(hi)) => {
            Extended::Finite(Enclosure { lo: lo.lo, hi: hi.hi }.pow(&q.recip())?.scale(t))
        }
        _ => Extended::Infinite,
    };
    Ok(HolmstedtPair { cut, head, tail })
}

/// The couples with a K-functional evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Couple {
    L1Linf,
    L0Lq,
    LpLq,
}

impl FromStr for Couple {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1linf" => Ok(Couple::L1Linf),
            "l0lq" => Ok(Couple::L0Lq),
            "lplq" => Ok(Couple::LpLq),
            _ => Err(Error::Parse(format!("unknown couple '{s}' (expected l1linf, l0lq or lplq)"))),
        }
    }
}

impl fmt::Display for Couple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Couple::L1Linf => "l1linf",
            Couple::L0Lq => "l0lq",
            Couple::LpLq => "lplq",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KFunctional {
    pub couple: Couple,
    pub p: Option<Rat>,
    pub q: Option<Rat>,
}

/// One evaluation. For `(L_0, L_q)` the value is the `q`-th power form of the
/// identity; for `(L_p, L_q)` it is the Holmstedt sum, an equivalent quantity
/// (`equivalent_only` is then set).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KValue {
    pub value: Extended,
    pub equivalent_only: bool,
    pub holmstedt: Option<HolmstedtPair>,
}

impl KFunctional {
    pub fn new(couple: Couple, p: Option<Rat>, q: Option<Rat>) -> Result<Self> {
        let need = |x: &Option<Rat>, what: &str| {
            x.clone().ok_or_else(|| Error::Invalid(format!("couple {couple} needs {what}")))
        };
        match couple {
            Couple::L1Linf => {}
            Couple::L0Lq => {
                if !need(&q, "q")?.is_positive() {
                    return Err(Error::Invalid("q must be positive".into()));
                }
            }
            Couple::LpLq => {
                holmstedt_alpha(&need(&p, "p")?, &need(&q, "q")?)?;
            }
        }
        Ok(KFunctional { couple, p, q })
    }

    pub fn eval(&self, f: &StepFunction, t: &Rat) -> Result<KValue> {
        if t.is_negative() {
            return Err(Error::Invalid("t must be nonnegative".into()));
        }
        Ok(match self.couple {
            Couple::L1Linf => {
                KValue { value: Extended::exact(k_l1_linf(f, t)), equivalent_only: false, holmstedt: None }
            }
            Couple::L0Lq => KValue {
                value: k_l0_lq(f, t, self.q.as_ref().expect("validated"))?,
                equivalent_only: false,
                holmstedt: None,
            },
            Couple::LpLq => {
                let h = holmstedt_pair(f, t, self.p.as_ref().expect("validated"), self.q.as_ref().expect("validated"))?;
                KValue { value: h.sum(), equivalent_only: true, holmstedt: Some(h) }
            }
        })
    }
}

/// Split `g = g1 + g2` with `g1^p ≺≺_hd f^p` and `g2^q ≺≺_tl f^q`.
///
/// `a` and `b` list the closed components of `A = {t : ∫_0^t g^p <= ∫_0^t f^p}`
/// and `B = {t : ∫_t^∞ g^q <= ∫_t^∞ f^q}` (degenerate intervals are points).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub g1: StepFunction,
    pub g2: StepFunction,
    pub h1: StepFunction,
    pub h2: StepFunction,
    pub a: Vec<Interval>,
    pub b: Vec<Interval>,
}

/// Positional data of the alternative inequalities on a refined grid.
struct Alternative {
    /// `0 = x_0 < ... < x_N`; beyond `x_N` both functions vanish.
    pts: Vec<Rat>,
    /// `∫_0^x (f^p - g^p)` at each point.
    da: Vec<Rat>,
    /// `∫_x^∞ (f^q - g^q)` at each point.
    db: Vec<Rat>,
}

fn merged_grid(f: &StepFunction, g: &StepFunction) -> Vec<Rat> {
    let mut pts: Vec<Rat> = f.breakpoints().into_iter().chain(g.breakpoints()).collect();
    pts.sort();
    pts.dedup();
    pts
}

/// Zero of the affine function through `(x0, y0)`, `(x1, y1)` when it changes sign strictly inside.
fn crossing(x0: &Rat, y0: &Rat, x1: &Rat, y1: &Rat) -> Option<Rat> {
    if (y0.is_negative() && y1.is_positive()) || (y0.is_positive() && y1.is_negative()) {
        Some(x0 + y0 * (x1 - x0) / (y0 - y1))
    } else {
        None
    }
}

impl Alternative {
    fn new(f: &StepFunction, g: &StepFunction, p: &Rat, q: &Rat) -> Result<Self> {
        for (h, name) in [(f, "f"), (g, "g")] {
            if !h.is_decreasing_rearrangement() {
                return Err(Error::Precondition(format!("{name} must be nonnegative and non-increasing")));
            }
            if !h.tail().is_zero() {
                return Err(Error::Precondition(format!("{name} must vanish at infinity (zero tail)")));
            }
        }
        let dp = f.pow(p)?.sub(&g.pow(p)?);
        let dq = f.pow(q)?.sub(&g.pow(q)?);
        let total_q = dq.integral().expect("zero tails");
        let eval = |pts: &[Rat]| -> (Vec<Rat>, Vec<Rat>) {
            let da = pts.iter().map(|x| dp.prefix_integral(x)).collect();
            let db = pts.iter().map(|x| &total_q - dq.prefix_integral(x)).collect();
            (da, db)
        };
        let grid = merged_grid(f, g);
        let (da, db) = eval(&grid);
        let mut pts = grid.clone();
        for i in 0..grid.len() - 1 {
            pts.extend(crossing(&grid[i], &da[i], &grid[i + 1], &da[i + 1]));
            pts.extend(crossing(&grid[i], &db[i], &grid[i + 1], &db[i + 1]));
        }
        pts.sort();
        pts.dedup();
        let (da, db) = eval(&pts);
        Ok(Alternative { pts, da, db })
    }

    /// On each refined cell neither difference changes sign inside, so the
    /// sign at the midpoint is the sign on the whole open cell.
    fn cell_in(&self, vals: &[Rat], i: usize) -> bool {
        !(&vals[i] + &vals[i + 1]).is_negative()
    }

    fn in_a(&self, i: usize) -> bool {
        self.cell_in(&self.da, i)
    }

    fn in_b(&self, i: usize) -> bool {
        self.cell_in(&self.db, i)
    }

    fn cells(&self) -> usize {
        self.pts.len() - 1
    }

    /// `[x_N, ∞)` lies in `A` iff the final head difference is nonnegative; it always lies in `B`.
    fn far_in_a(&self) -> bool {
        !self.da.last().expect("nonempty grid").is_negative()
    }

    fn certificate(&self) -> Certificate {
        for i in 0..self.cells() {
            if !self.in_a(i) && !self.in_b(i) {
                let mid = (&self.pts[i] + &self.pts[i + 1]) / rat::int(2);
                return Certificate {
                    holds: false,
                    witness: Some(mid),
                    flagged: false,
                    note: Some("both alternative inequalities fail".into()),
                };
            }
        }
        Certificate { holds: true, witness: None, flagged: false, note: None }
    }

    /// Closed components of `{x : vals(x) >= 0}`.
    #[allow(clippy::needless_range_loop)]
    fn components(&self, vals: &[Rat], cell_in: impl Fn(usize) -> bool, far: bool) -> Vec<Interval> {
        let n = self.cells();
        let mut out: Vec<Interval> = Vec::new();
        let mut open: Option<Rat> = None;
        for k in 0..=n {
            let x = &self.pts[k];
            let left = k > 0 && cell_in(k - 1);
            let right = if k < n { cell_in(k) } else { far };
            match (&open, left, right) {
                (None, _, true) => open = Some(x.clone()),
                (Some(s), true, false) => {
                    out.push(Interval::new(s.clone(), x.clone()));
                    open = None;
                }
                (None, false, false) if !vals[k].is_negative() => out.push(Interval::new(x.clone(), x.clone())),
                _ => {}
            }
        }
        if let Some(s) = open {
            out.push(Interval::unbounded(s));
        }
        out
    }
}

/// Decides the alternative-inequality precondition at every `t > 0`.
pub fn check_alternative(f: &StepFunction, g: &StepFunction, p: &Rat, q: &Rat) -> Result<Certificate> {
    Ok(Alternative::new(f, g, p, q)?.certificate())
}

pub fn decompose_pq(f: &StepFunction, g: &StepFunction, p: &Rat, q: &Rat) -> Result<Decomposition> {
    holmstedt_alpha(p, q)?;
    let alt = Alternative::new(f, g, p, q)?;
    let cert = alt.certificate();
    if !cert.holds {
        let t = cert.witness.expect("failing certificate has a witness");
        return Err(Error::Precondition(format!("both alternative inequalities fail at t = {}", rat::format(&t))));
    }
    let a = alt.components(&alt.da, |i| alt.in_a(i), alt.far_in_a());
    let b = alt.components(&alt.db, |i| alt.in_b(i), true);
    let n = alt.cells();
    let (mut h1, mut h2, mut g1, mut g2) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        let gv = g.value_at(&alt.pts[i]);
        let v1 = if alt.in_a(i) {
            gv.clone()
        } else {
            // u_+ is the first point of A at or after the right end of the cell
            let end = &alt.pts[i + 1];
            let u = a.iter().find_map(|c| match &c.end {
                Some(e) if e < end => None,
                _ => Some(rat::max(&c.start, end)),
            });
            u.map_or_else(Rat::zero, |u| g.left_limit(&u))
        };
        let v2 = if alt.in_b(i) { gv.clone() } else { Rat::zero() };
        let den = &v1 + &v2;
        if den.is_zero() {
            debug_assert!(gv.is_zero());
            g1.push(Rat::zero());
            g2.push(Rat::zero());
        } else {
            g1.push(&v1 * &gv / &den);
            g2.push(&v2 * &gv / &den);
        }
        h1.push(v1);
        h2.push(v2);
    }
    let build = |vals: &[Rat]| StepFunction::from_breakpoints(&alt.pts, vals, Rat::zero());
    Ok(Decomposition { g1: build(&g1), g2: build(&g2), h1: build(&h1), h2: build(&h2), a, b })
}

/// Exact postcondition verdict for a decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionCheck {
    pub additive: bool,
    pub head: Certificate,
    pub tail: Certificate,
}

impl DecompositionCheck {
    pub fn passed(&self) -> bool {
        self.additive && self.head.holds && self.tail.holds
    }
}

pub fn verify_decomposition(
    f: &StepFunction,
    g: &StepFunction,
    p: &Rat,
    q: &Rat,
    d: &Decomposition,
) -> Result<DecompositionCheck> {
    Ok(DecompositionCheck {
        additive: d.g1.add(&d.g2) == *g && d.g1.is_nonnegative() && d.g2.is_nonnegative(),
        head: check_order(f, &d.g1, &OrderKind::new(OrderTag::HeadWeak, p.clone()))?,
        tail: check_order(f, &d.g2, &OrderKind::new(OrderTag::TailWeak, q.clone()))?,
    })
}

/// Where a membership probe samples its pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeDomain {
    Function,
    Sequence,
}

/// One member of the spike/plateau family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyPoint {
    pub n: u64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
}

/// Bounded-ratio evidence or a counterexample family; never a membership claim.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeVerdict {
    pub oracle: String,
    pub kind: String,
    pub domain: ProbeDomain,
    pub samples: usize,
    pub evaluated: usize,
    /// Pairs with `f` zero or of infinite norm.
    pub skipped: usize,
    pub errors: usize,
    /// Upper end of the largest certified ratio `‖g‖/‖f‖` over random samples.
    pub max_ratio: f64,
    /// Some sample had `‖f‖ < ∞ = ‖g‖`.
    pub infinite_ratio: bool,
    pub family: Vec<FamilyPoint>,
    /// Family ratios strictly increase and grow by at least [`DIVERGENCE_GROWTH`],
    /// or some sample had an infinite ratio.
    pub divergent: bool,
}

pub const DIVERGENCE_GROWTH: f64 = 2.0;

/// `[lo(num)/hi(den), hi(num)/lo(den)]`, with `None` for a zero denominator.
pub fn ratio_enclosure(num: &Enclosure, den: &Enclosure) -> Option<Enclosure> {
    if !den.lo.is_positive() {
        return None;
    }
    Some(Enclosure { lo: &num.lo / &den.hi, hi: &num.hi / &den.lo })
}

/// `2^{k·m}` and `2^{k·n}` for `r = m/n`, so that `(2^{kn})^r = 2^{km}`.
fn family_scales(r: &Rat, k: u32) -> (Rat, Rat) {
    let m: u32 = r.numer().try_into().expect("small exponent");
    let n: u32 = r.denom().try_into().expect("small exponent");
    (rat::pow2((k * m) as i64), rat::pow2((k * n) as i64))
}

/// Spike `S` and plateau `P` with `S^r = N χ_(0,1/N)` and `P = χ_(0,1)`
/// (sequences: `S = N^{1/r} e_0`, `P` = `N` ones), `N = 2^{km}`.
/// Returns `(f, g)` oriented so that `g` is below `f` in `tag`.
fn family_member(tag: OrderTag, r: &Rat, k: u32, domain: ProbeDomain) -> (Operand, Operand, u64) {
    let (big_n, spike) = family_scales(r, k);
    let count: u64 = big_n.to_integer().try_into().expect("family size fits in u64");
    let (s, pl) = match domain {
        ProbeDomain::Function => (
            Operand::Step(StepFunction::indicator(Rat::zero(), big_n.recip(), spike)),
            Operand::Step(StepFunction::indicator(Rat::zero(), rat::one(), rat::one())),
        ),
        ProbeDomain::Sequence => {
            (Operand::Seq(FinSeq::new(vec![spike])), Operand::Seq(FinSeq::new(vec![rat::one(); count as usize])))
        }
    };
    if tag.is_head() {
        (s, pl, count)
    } else {
        (pl, s, count)
    }
}

fn oracle_norm(x: &Operand, oracle: &dyn NormOracle) -> Result<Extended> {
    match x {
        Operand::Step(h) => oracle.step_norm(h),
        Operand::Seq(a) => Ok(Extended::Finite(oracle.seq_norm(a)?)),
    }
}

fn ordered(f: &Operand, g: &Operand, kind: &OrderKind) -> Result<bool> {
    Ok(match (f, g) {
        (Operand::Step(f), Operand::Step(g)) => check_order(f, g, kind)?.holds,
        (Operand::Seq(f), Operand::Seq(g)) => check_order_seq(f, g, kind)?.holds,
        _ => false,
    })
}

enum PairRatio {
    Finite(Enclosure),
    /// `‖f‖ < ∞ = ‖g‖`.
    Infinite,
    /// `f` is zero or outside the space; nothing to compare.
    Skipped,
}

fn pair_ratio(f: &Operand, g: &Operand, oracle: &dyn NormOracle) -> Result<PairRatio> {
    let Extended::Finite(nf) = oracle_norm(f, oracle)? else { return Ok(PairRatio::Skipped) };
    let Extended::Finite(ng) = oracle_norm(g, oracle)? else { return Ok(PairRatio::Infinite) };
    Ok(ratio_enclosure(&ng, &nf).map_or(PairRatio::Skipped, PairRatio::Finite))
}

/// Family sizes `N = 2^{km}` for `k = 1..=FAMILY_LEVELS`; sequence families stop at `N = 2^16`.
pub const FAMILY_LEVELS: u32 = 8;

fn family_levels(r: &Rat, domain: ProbeDomain) -> u32 {
    match domain {
        ProbeDomain::Function => FAMILY_LEVELS,
        ProbeDomain::Sequence => {
            let m: u32 = r.numer().try_into().unwrap_or(u32::MAX);
            FAMILY_LEVELS.min(16 / m.max(1))
        }
    }
}

/// Samples ordered pairs of the given kind and records `‖g‖/‖f‖`; the
/// spike/plateau family is evaluated along growing `N` to detect divergence.
pub fn membership_probe(
    oracle: &dyn NormOracle,
    kind: &OrderKind,
    domain: ProbeDomain,
    samples: usize,
    seed: u64,
) -> Result<ProbeVerdict> {
    if domain == ProbeDomain::Function && !oracle.supports_step() {
        return Err(Error::Unsupported(format!("oracle {} only evaluates sequences", oracle.name())));
    }
    let mut max_ratio = 0f64;
    let (mut evaluated, mut skipped, mut errors) = (0, 0, 0);
    let mut infinite_ratio = false;
    for i in 0..samples {
        let mut rng = instance_rng(seed, i as u64);
        let size = rng.gen_range(1..=8);
        let scrambled = rng.gen_bool(0.5);
        let pair = match domain {
            ProbeDomain::Function => {
                gen_pair_with(&mut rng, kind, size).map(|(f, g)| (Operand::Step(f), Operand::Step(g)))
            }
            ProbeDomain::Sequence => gen_seq_pair_with(&mut rng, kind.tag, size, &kind.r, scrambled)
                .map(|(a, b)| (Operand::Seq(a), Operand::Seq(b))),
        };
        match pair.and_then(|(f, g)| pair_ratio(&f, &g, oracle)) {
            Ok(PairRatio::Finite(r)) => {
                evaluated += 1;
                max_ratio = max_ratio.max(rat::to_f64(&r.hi));
            }
            Ok(PairRatio::Infinite) => {
                evaluated += 1;
                infinite_ratio = true;
            }
            Ok(PairRatio::Skipped) => skipped += 1,
            Err(_) => errors += 1,
        }
    }
    let mut family = Vec::new();
    for k in 1..=family_levels(&kind.r, domain) {
        let (f, g, n) = family_member(kind.tag, &kind.r, k, domain);
        if !ordered(&f, &g, kind)? {
            return Err(Error::Oracle(format!("spike/plateau family is not ordered at N = {n}")));
        }
        if let PairRatio::Finite(r) = pair_ratio(&f, &g, oracle)? {
            family.push(FamilyPoint { n, ratio_lo: rat::to_f64(&r.lo), ratio_hi: rat::to_f64(&r.hi) });
        }
    }
    let divergent = infinite_ratio
        || family.len() >= 2
            && family.windows(2).all(|w| w[1].ratio_lo > w[0].ratio_hi)
            && family.last().unwrap().ratio_lo >= DIVERGENCE_GROWTH * family[0].ratio_hi;
    Ok(ProbeVerdict {
        oracle: oracle.name(),
        kind: kind.to_string(),
        domain,
        samples,
        evaluated,
        skipped,
        errors,
        max_ratio,
        infinite_ratio,
        family,
        divergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    #[test]
    fn alpha() {
        assert_eq!(holmstedt_alpha(&int(1), &int(2)).unwrap(), int(2));
        assert_eq!(holmstedt_alpha(&frac(1, 2), &int(1)).unwrap(), int(1));
        assert!(holmstedt_alpha(&int(2), &int(1)).is_err());
    }

    #[test]
    fn components_include_isolated_points() {
        let alt = Alternative {
            pts: vec![int(0), int(1), int(2), int(3)],
            da: vec![int(0), int(1), int(0), int(-1)],
            db: vec![],
        };
        let a = alt.components(&alt.da, |i| alt.in_a(i), false);
        assert_eq!(a, vec![Interval::new(int(0), int(2))]);
        let alt = Alternative { pts: vec![int(0), int(1), int(2)], da: vec![int(0), int(-1), int(0)], db: vec![] };
        let a = alt.components(&alt.da, |i| alt.in_a(i), false);
        assert_eq!(a, vec![Interval::new(int(0), int(0)), Interval::new(int(2), int(2))]);
    }
}
