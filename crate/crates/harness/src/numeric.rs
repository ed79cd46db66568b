//! Reference computations the exact routines are compared against. They use
//! deliberately different methods: distribution functions instead of
//! sorting, dense floating-point grids instead of breakpoint sweeps, subset
//! enumeration instead of greedy cuts.

use majorn_core::exact;
use majorn_core::rat::{self, Rat};
use majorn_core::{OrderTag, Result, StepFunction};
use num_traits::{Signed, Zero};

/// `μ(f)` from the distribution function `s ↦ m{|f| >= s}` at the distinct levels.
pub fn rearrange_by_distribution(f: &StepFunction) -> StepFunction {
    let tail = f.tail().abs();
    let mut levels: Vec<Rat> = f.pieces().iter().map(|p| p.val.abs()).filter(|v| *v > tail).collect();
    levels.sort();
    levels.dedup();
    levels.reverse();
    let mut pieces = Vec::with_capacity(levels.len());
    let mut below = Rat::zero();
    for v in levels {
        let m: Rat = f.pieces().iter().filter(|p| p.val.abs() >= v).map(|p| p.len.clone()).sum();
        pieces.push((&m - &below, v));
        below = m;
    }
    StepFunction::from_parts(pieces, tail)
}

/// `μ(|h|)^r` in floating point.
struct Profile {
    pieces: Vec<(f64, f64)>,
    tail: f64,
    infinite: bool,
}

impl Profile {
    fn new(h: &StepFunction, r: f64) -> Self {
        let tail = h.tail().abs();
        let mut pieces: Vec<(f64, f64)> = h
            .pieces()
            .iter()
            .filter(|p| p.val.abs() > tail)
            .map(|p| (rat::to_f64(&p.len), rat::to_f64(&p.val.abs()).powf(r)))
            .collect();
        pieces.sort_by(|a, b| b.1.total_cmp(&a.1));
        Profile { pieces, tail: rat::to_f64(&tail).powf(r), infinite: !tail.is_zero() }
    }

    fn span(&self) -> f64 {
        self.pieces.iter().map(|p| p.0).sum()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut x = 0.0;
        self.pieces
            .iter()
            .map(|p| {
                x += p.0;
                x
            })
            .collect()
    }

    fn head(&self, t: f64) -> f64 {
        let (mut acc, mut x) = (0.0, 0.0);
        for &(len, v) in &self.pieces {
            if t <= x + len {
                return acc + (t - x) * v;
            }
            acc += len * v;
            x += len;
        }
        acc + (t - x) * self.tail
    }

    fn tail_from(&self, t: f64) -> f64 {
        if self.infinite {
            return f64::INFINITY;
        }
        let (mut acc, mut x) = (0.0, 0.0);
        for &(len, v) in &self.pieces {
            let end = x + len;
            if end > t {
                acc += (end - t.max(x)) * v;
            }
            x = end;
        }
        acc
    }

    fn total(&self) -> f64 {
        self.tail_from(0.0)
    }
}

fn exceeds(lhs: f64, rhs: f64) -> bool {
    if rhs.is_infinite() {
        return false;
    }
    lhs > rhs + 1e-9 * (1.0 + lhs.abs().max(rhs.abs()))
}

/// Numeric decision of `g ≺ f` from `points` sample points: the breakpoints of
/// both rearrangements padded with a uniform grid on `[0, 3/2·span]`, plus the
/// comparison of the tail slopes.
pub fn dense_order(f: &StepFunction, g: &StepFunction, tag: OrderTag, r: &Rat, points: usize) -> bool {
    let rf = rat::to_f64(r);
    let (pf, pg) = (Profile::new(f, rf), Profile::new(g, rf));
    let mut grid = vec![0.0];
    grid.extend(pf.breakpoints());
    grid.extend(pg.breakpoints());
    let reach = 1.5 * pf.span().max(pg.span()).max(1.0);
    let fill = points.saturating_sub(grid.len()).max(2);
    grid.extend((0..fill).map(|j| reach * j as f64 / (fill - 1) as f64));

    if tag.is_equal()
        && (pf.infinite || pg.infinite || exceeds(pg.total(), pf.total()) || exceeds(pf.total(), pg.total()))
    {
        return false;
    }
    if tag.is_head() {
        if grid.iter().any(|&t| exceeds(pg.head(t), pf.head(t))) {
            return false;
        }
        !exceeds(pg.tail, pf.tail)
    } else {
        match (pf.infinite, pg.infinite) {
            (true, _) => true,
            (false, true) => false,
            _ => !grid.iter().any(|&t| exceeds(pg.tail_from(t), pf.tail_from(t))),
        }
    }
}

/// `min_j ∫(|f| - c_j)_+ + t·c_j` over `c_j = j·max|f|/2^bits`, together with
/// the resolution `max|f|/2^bits · max(t, m(supp f))` bounding its excess
/// over the true infimum. Requires a zero tail.
pub fn k_l1_linf_grid(f: &StepFunction, t: &Rat, bits: u32) -> (Rat, Rat) {
    let top = f.pieces().iter().map(|p| p.val.abs()).max().unwrap_or_else(Rat::zero);
    let steps = 1i64 << bits;
    let h = &top / rat::int(steps);
    let objective = |c: &Rat| -> Rat {
        let excess: Rat = f.pieces().iter().map(|p| (p.val.abs() - c).max(Rat::zero()) * &p.len).sum();
        excess + t * c
    };
    let best = (0..=steps).map(|j| objective(&(&h * rat::int(j)))).min().expect("nonempty grid");
    let support: Rat = f.pieces().iter().filter(|p| !p.val.is_zero()).map(|p| p.len.clone()).sum();
    let resolution = &h * rat::max(t, &support);
    (best, resolution)
}

/// `min Σ_{pieces ∉ S} |v|^q·len` over piece subsets `S` with total length
/// `<= t`. Needs rational `|v|^q`; exponential in the number of pieces.
pub fn k_l0_lq_subsets(f: &StepFunction, t: &Rat, q: &Rat) -> Result<Rat> {
    let cells: Vec<(Rat, Rat)> = f
        .pieces()
        .iter()
        .map(|p| Ok((p.len.clone(), exact::pow_required(&p.val.abs(), q)? * &p.len)))
        .collect::<Result<_>>()?;
    let total: Rat = cells.iter().map(|c| &c.1).sum();
    let mut best = total.clone();
    for mask in 0u64..(1 << cells.len()) {
        let (mut len, mut mass) = (Rat::zero(), Rat::zero());
        for (i, c) in cells.iter().enumerate() {
            if mask >> i & 1 == 1 {
                len += &c.0;
                mass += &c.1;
            }
        }
        if len <= *t {
            best = best.min(&total - mass);
        }
    }
    Ok(best)
}
