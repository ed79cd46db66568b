//! Head and tail (sub)majorization: exact decision procedures.
//!
//! Both sides of every defining inequality are piecewise affine in `t` with
//! breakpoints on the union grid of the two rearrangements, so checking the
//! grid points (and the asymptotic slopes) decides the order for all `t`.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Enclosure};
use crate::finseq::FinSeq;
use crate::interval::IntervalSet;
use crate::rat::{self, Rat};
use crate::stepfn::StepFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderTag {
    HeadWeak,
    HeadEqual,
    TailWeak,
    TailEqual,
}

impl OrderTag {
    pub const ALL: [OrderTag; 4] = [OrderTag::HeadWeak, OrderTag::HeadEqual, OrderTag::TailWeak, OrderTag::TailEqual];

    pub fn is_head(self) -> bool {
        matches!(self, OrderTag::HeadWeak | OrderTag::HeadEqual)
    }

    pub fn is_equal(self) -> bool {
        matches!(self, OrderTag::HeadEqual | OrderTag::TailEqual)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OrderTag::HeadWeak => "head-weak",
            OrderTag::HeadEqual => "head-equal",
            OrderTag::TailWeak => "tail-weak",
            OrderTag::TailEqual => "tail-equal",
        }
    }
}

impl FromStr for OrderTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "head-weak" => Ok(OrderTag::HeadWeak),
            "head-equal" => Ok(OrderTag::HeadEqual),
            "tail-weak" => Ok(OrderTag::TailWeak),
            "tail-equal" => Ok(OrderTag::TailEqual),
            other => Err(Error::Parse(format!(
                "unknown order kind {other:?} (expected head-weak, head-equal, tail-weak or tail-equal)"
            ))),
        }
    }
}

impl fmt::Display for OrderTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An order together with the exponent applied before integrating.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderKind {
    pub tag: OrderTag,
    #[serde(with = "rat::serde_str")]
    pub r: Rat,
}

impl OrderKind {
    pub fn new(tag: OrderTag, r: Rat) -> Self {
        assert!(r.is_positive(), "order exponent must be positive");
        OrderKind { tag, r }
    }
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (r = {})", self.tag, rat::format(&self.r))
    }
}

/// Outcome of an order check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub holds: bool,
    /// A point `t` where the defining inequality fails.
    #[serde(with = "opt_rat", skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Rat>,
    /// Set when the check relied on `+∞ <= +∞`.
    #[serde(default)]
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

mod opt_rat {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&rat::format(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rat>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| rat::parse(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

impl Certificate {
    fn pass() -> Self {
        Certificate { holds: true, witness: None, flagged: false, note: None }
    }

    fn fail(t: Rat, note: impl Into<String>) -> Self {
        Certificate { holds: false, witness: Some(t), flagged: false, note: Some(note.into()) }
    }
}

/// `|h|^r` on a positional grid, with enclosures where the power is irrational.
#[derive(Clone, Debug)]
pub(crate) struct Powered {
    pub pts: Vec<Rat>,
    pub vals: Vec<Enclosure>,
    pub tail: Enclosure,
}

impl Powered {
    pub fn new(h: &StepFunction, r: &Rat) -> Result<Self> {
        let vals = h.pieces().iter().map(|p| exact::pow_enclosure(&p.val.abs(), r)).collect::<Result<Vec<_>>>()?;
        Ok(Powered { pts: h.breakpoints(), vals, tail: exact::pow_enclosure(&h.tail().abs(), r)? })
    }

    /// `∫_0^x` at every grid point `x` (sorted, starting at 0).
    pub fn cumulative(&self, grid: &[Rat]) -> Vec<Enclosure> {
        let mut out = Vec::with_capacity(grid.len());
        let mut acc = Enclosure::zero();
        let mut i = 0;
        let mut prev = Rat::zero();
        for x in grid {
            // integrate from prev to x across pieces
            while prev < *x {
                let (end, v) =
                    if i < self.vals.len() { (Some(&self.pts[i + 1]), &self.vals[i]) } else { (None, &self.tail) };
                let stop = match end {
                    Some(e) if e < x => e.clone(),
                    _ => x.clone(),
                };
                acc = acc.add(&v.scale(&(&stop - &prev)));
                if end == Some(&stop) {
                    i += 1;
                }
                prev = stop;
            }
            out.push(acc.clone());
        }
        out
    }

    pub fn total(&self) -> Option<Enclosure> {
        if !self.tail.lo.is_zero() || !self.tail.hi.is_zero() {
            return None;
        }
        let mut acc = Enclosure::zero();
        for (w, v) in self.pts.windows(2).zip(&self.vals) {
            acc = acc.add(&v.scale(&(&w[1] - &w[0])));
        }
        Some(acc)
    }
}

fn union_grid(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut g: Vec<Rat> = a.iter().chain(b).cloned().collect();
    g.sort();
    g.dedup();
    g
}

fn decide(lhs: &Enclosure, rhs: &Enclosure, what: &str) -> Result<bool> {
    lhs.le_certified(rhs, what)
}

fn check_equal_mass(pf: &Powered, pg: &Powered) -> Result<Option<Certificate>> {
    let (Some(tf), Some(tg)) = (pf.total(), pg.total()) else {
        return Err(Error::Precondition("equal-mass orders need both functions in L_r (zero tails)".into()));
    };
    let le = decide(&tg, &tf, "total mass")?;
    let ge = decide(&tf, &tg, "total mass")?;
    if le && ge {
        Ok(None)
    } else {
        Ok(Some(Certificate {
            holds: false,
            witness: Some(Rat::zero()),
            flagged: false,
            note: Some(format!("total r-masses differ: {tf} vs {tg}")),
        }))
    }
}

/// Head inequalities `∫_0^t G <= ∫_0^t F` on given positional profiles.
fn head_check(pf: &Powered, pg: &Powered, extra: &[Rat]) -> Result<Certificate> {
    let mut grid = union_grid(&pf.pts, &pg.pts);
    grid = union_grid(&grid, extra);
    let cf = pf.cumulative(&grid);
    let cg = pg.cumulative(&grid);
    for ((x, a), b) in grid.iter().zip(&cf).zip(&cg) {
        if !decide(b, a, "head integral")? {
            return Ok(Certificate::fail(x.clone(), "head integral of g exceeds that of f"));
        }
    }
    // beyond the last breakpoint both sides grow linearly with the tail values
    if !decide(&pg.tail, &pf.tail, "asymptotic slope")? {
        let last = grid.last().cloned().unwrap_or_else(Rat::zero);
        let gap = cf.last().unwrap().sub(cg.last().unwrap());
        let slope = pg.tail.sub(&pf.tail);
        // strictly past the crossing point
        let t = &last + &gap.hi / &slope.lo + rat::one();
        return Ok(Certificate::fail(t, "tail value of g exceeds that of f"));
    }
    Ok(Certificate::pass())
}

/// Tail inequalities `∫_t^∞ G <= ∫_t^∞ F`.
fn tail_check(pf: &Powered, pg: &Powered, extra: &[Rat]) -> Result<Certificate> {
    let f_inf = pf.total().is_none();
    let g_inf = pg.total().is_none();
    match (f_inf, g_inf) {
        (true, true) => {
            return Ok(Certificate {
                holds: true,
                witness: None,
                flagged: true,
                note: Some("both tail integrals are +inf".into()),
            })
        }
        (true, false) => return Ok(Certificate::pass()),
        (false, true) => {
            return Ok(Certificate::fail(Rat::zero(), "tail integral of g is +inf"));
        }
        (false, false) => {}
    }
    let mut grid = union_grid(&pf.pts, &pg.pts);
    grid = union_grid(&grid, extra);
    let tf = pf.total().unwrap();
    let tg = pg.total().unwrap();
    let cf = pf.cumulative(&grid);
    let cg = pg.cumulative(&grid);
    for ((x, a), b) in grid.iter().zip(&cf).zip(&cg) {
        let rf = tf.sub(a);
        let rg = tg.sub(b);
        if !decide(&rg, &rf, "tail integral")? {
            return Ok(Certificate::fail(x.clone(), "tail integral of g exceeds that of f"));
        }
    }
    Ok(Certificate::pass())
}

/// Decides `g ≺ f` for the given order kind (`g` is the dominated member).
pub fn check_order(f: &StepFunction, g: &StepFunction, kind: &OrderKind) -> Result<Certificate> {
    let pf = Powered::new(&f.rearrange(), &kind.r)?;
    let pg = Powered::new(&g.rearrange(), &kind.r)?;
    check_profiles(&pf, &pg, kind.tag, &[])
}

fn check_profiles(pf: &Powered, pg: &Powered, tag: OrderTag, extra: &[Rat]) -> Result<Certificate> {
    if tag.is_equal() {
        if let Some(c) = check_equal_mass(pf, pg)? {
            return Ok(c);
        }
    }
    if tag.is_head() {
        head_check(pf, pg, extra)
    } else {
        tail_check(pf, pg, extra)
    }
}

/// Sequence version through the embedding `a_n` on `[n, n+1)`.
pub fn check_order_seq(a: &FinSeq, b: &FinSeq, kind: &OrderKind) -> Result<Certificate> {
    check_order(&a.to_step(), &b.to_step(), kind)
}

/// Positional restricted order: `∫_{[0,t]∩Δ} g^r <= ∫_{[0,t]∩Δ} f^r` (head) or
/// the matching suffix inequalities (tail), without rearranging.
pub fn check_order_on_set(
    f: &StepFunction,
    g: &StepFunction,
    delta: &IntervalSet,
    kind: &OrderKind,
) -> Result<Certificate> {
    if !f.is_decreasing_rearrangement() || !g.is_decreasing_rearrangement() {
        return Err(Error::Precondition("restricted order check needs non-increasing f and g".into()));
    }
    let pf = Powered::new(&f.restrict(delta), &kind.r)?;
    let pg = Powered::new(&g.restrict(delta), &kind.r)?;
    check_profiles(&pf, &pg, kind.tag, &delta.endpoints())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;
    use crate::rat::{frac, int};

    fn kind(tag: OrderTag) -> OrderKind {
        OrderKind::new(tag, int(1))
    }

    #[test]
    fn head_weak_examples() {
        let g = StepFunction::indicator(int(0), int(2), int(1));
        let f = StepFunction::indicator(int(0), int(1), int(2));
        assert!(check_order(&f, &g, &kind(OrderTag::HeadWeak)).unwrap().holds);
        let c = check_order(&g, &f, &kind(OrderTag::HeadWeak)).unwrap();
        assert!(!c.holds);
        assert_eq!(c.witness, Some(int(1)));
    }

    #[test]
    fn identity_holds_for_all_kinds() {
        let f = StepFunction::from_parts(vec![(int(1), int(3)), (frac(1, 2), int(1))], int(0));
        for tag in OrderTag::ALL {
            assert!(check_order(&f, &f, &kind(tag)).unwrap().holds, "{tag}");
        }
    }

    #[test]
    fn tail_weak_example() {
        let f = StepFunction::indicator(int(0), int(2), int(1));
        let g = StepFunction::indicator(int(0), int(1), int(2));
        assert!(check_order(&f, &g, &kind(OrderTag::TailWeak)).unwrap().holds);
        assert!(check_order(&f, &g, &kind(OrderTag::TailEqual)).unwrap().holds);
        assert!(!check_order(&g, &f, &kind(OrderTag::TailWeak)).unwrap().holds);
    }

    #[test]
    fn infinite_tails() {
        let f = StepFunction::constant(int(1));
        let g = StepFunction::indicator(int(0), int(1), int(1));
        let both = check_order(&f, &f, &kind(OrderTag::TailWeak)).unwrap();
        assert!(both.holds && both.flagged);
        assert!(!check_order(&g, &f, &kind(OrderTag::TailWeak)).unwrap().holds);
        assert!(check_order(&f, &g, &kind(OrderTag::HeadEqual)).unwrap_err().is_precondition());
        // head order: constant 1 dominates, asymptotic slope decides the reverse
        assert!(check_order(&f, &g, &kind(OrderTag::HeadWeak)).unwrap().holds);
        let c = check_order(&g, &f, &kind(OrderTag::HeadWeak)).unwrap();
        assert!(!c.holds);
        let t = c.witness.unwrap();
        assert!(f.head_integral(&t) > g.head_integral(&t));
    }

    #[test]
    fn exponent_half_uses_square_roots() {
        // f^(1/2) = 2χ_(0,1), g^(1/2) = χ_(0,2)
        let f = StepFunction::indicator(int(0), int(1), int(4));
        let g = StepFunction::indicator(int(0), int(2), int(1));
        let k = OrderKind::new(OrderTag::HeadEqual, frac(1, 2));
        assert!(check_order(&f, &g, &k).unwrap().holds);
    }

    #[test]
    fn restricted_examples() {
        let f = StepFunction::from_parts(vec![(int(1), int(2)), (int(1), int(1))], int(0));
        let g = StepFunction::indicator(int(0), int(2), int(1));
        let delta = IntervalSet::single(Interval::new(int(0), int(1)));
        assert!(check_order_on_set(&f, &g, &delta, &kind(OrderTag::HeadWeak)).unwrap().holds);
        let all = IntervalSet::half_line();
        assert_eq!(
            check_order_on_set(&f, &g, &all, &kind(OrderTag::HeadWeak)).unwrap().holds,
            check_order(&f, &g, &kind(OrderTag::HeadWeak)).unwrap().holds
        );
    }

    #[test]
    fn sequences_embed() {
        let a = FinSeq::from_ints(&[2, 0]);
        let b = FinSeq::from_ints(&[1, 1]);
        assert!(check_order_seq(&a, &b, &kind(OrderTag::HeadEqual)).unwrap().holds);
        assert!(check_order_seq(&b, &a, &kind(OrderTag::TailEqual)).unwrap().holds);
    }
}
